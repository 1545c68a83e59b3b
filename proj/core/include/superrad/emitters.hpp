#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "superrad/random.hpp"

namespace superrad {

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

/// Angular transition frequency (rad/s) for a vacuum wavelength in nm.
double omega_from_wavelength_nm(double lambda0_nm);

/// N identical two-level emitters: positions in nm, unit dipole directions,
/// and the shared transition wavelength.
///
/// Construction enforces N >= 1, unit-norm dipoles (1e-12) and pairwise
/// distinct positions. Coincident positions are accepted only when
/// `allow_coincident` is set (the d = 0 Dicke idealization).
class EmitterArray {
 public:
  EmitterArray(std::vector<Vec3> positions_nm, std::vector<Vec3> dipoles, double lambda0_nm,
               bool allow_coincident = false, double dipole_magnitude = 1.0);

  std::size_t size() const { return positions_.size(); }
  std::span<const Vec3> positions_nm() const { return positions_; }
  std::span<const Vec3> dipoles() const { return dipoles_; }
  double lambda0_nm() const { return lambda0_nm_; }
  double omega0() const { return omega_from_wavelength_nm(lambda0_nm_); }
  double dipole_magnitude() const { return dipole_magnitude_; }
  bool allows_coincident() const { return allow_coincident_; }

  /// Emitters at the given indices, in the order given.
  EmitterArray subset(std::span<const std::size_t> indices) const;

  bool operator==(const EmitterArray&) const = default;

 private:
  std::vector<Vec3> positions_;
  std::vector<Vec3> dipoles_;
  double lambda0_nm_;
  bool allow_coincident_;
  double dipole_magnitude_;
};

struct LatticeSpec {
  int n_side = 3;
  double lattice_const_nm = 400.0;
  double offset_x0_nm = 0.163 * 400.0;
  double height_nm = 104.0;
  Vec3 dipole_axis{0.0, 1.0, 0.0};
  // Needed for lattice_const_nm == 0 when n_side > 1.
  bool allow_coincident = false;
};

/// Square lattice of n_side^2 emitters centred on (x0, 0, z).
///
/// Emitter (i, j) sits at (x0 + d (i - (n-1)/2), d (j - (n-1)/2), z) and is
/// stored at index i * n_side + j, so i (the x index) is the slow index.
EmitterArray build_square_lattice(const LatticeSpec& spec, double lambda0_nm);

/// Equally spaced grid of `steps` intervals spanning [-half_width, +half_width]
/// (steps + 1 values, both endpoints included). Jitter draws are taken from
/// this grid so repeated offsets can be recognised and their rates reused.
struct JitterGrid {
  double half_width = 0.0;
  int steps = 100;

  int count() const { return steps + 1; }
  double spacing() const { return 2.0 * half_width / steps; }
  double value(int k) const;
};

/// Number of emitters kept for filling fraction eta: round-half-up of eta * N.
std::size_t filled_count(std::size_t n, double eta);

/// Sorted indices of a uniformly random subset of filled_count(n, eta) sites.
std::vector<std::size_t> draw_filling_subset(std::size_t n, double eta, RandomStream& rng);

/// Per-emitter (kx, ky) grid indices; each pair satisfies hypot(dx, dy) <= delta_r.
std::vector<std::array<int, 2>> draw_position_offsets(std::size_t n, const JitterGrid& grid,
                                                      RandomStream& rng);

/// Per-emitter grid index of the in-plane angle shift.
std::vector<int> draw_orientation_offsets(std::size_t n, const JitterGrid& grid,
                                          RandomStream& rng);

/// In-plane unit dipole at angle 90 deg + theta from the x axis.
Vec3 rotated_dipole(double theta_deg);

EmitterArray apply_filling_fraction(const EmitterArray& array, double eta, RandomStream& rng);
EmitterArray apply_position_jitter(const EmitterArray& array, double delta_r_nm, int steps,
                                   RandomStream& rng);
EmitterArray apply_orientation_jitter(const EmitterArray& array, double delta_theta_deg, int steps,
                                      RandomStream& rng);

/// Position jitter with explicit offsets (used when offsets must be known to the caller).
EmitterArray shift_positions(const EmitterArray& array, const JitterGrid& grid,
                             std::span<const std::array<int, 2>> offsets);
EmitterArray rotate_dipoles(const EmitterArray& array, const JitterGrid& grid,
                            std::span<const int> offsets);

}  // namespace superrad
