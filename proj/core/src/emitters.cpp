#include "superrad/emitters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace superrad {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr double kSpeedOfLight = 299792458.0;

bool finite3(const Vec3& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

// cos/sin of an angle in degrees, exact at multiples of 90 degrees.
std::array<double, 2> cos_sin_deg(double deg) {
  const double quarter = deg / 90.0;
  if (quarter == std::floor(quarter) && std::abs(quarter) < 1e15) {
    static constexpr std::array<std::array<double, 2>, 4> table{
        {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}};
    const auto q = static_cast<long long>(quarter);
    return table[static_cast<std::size_t>(((q % 4) + 4) % 4)];
  }
  const double rad = deg * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

}  // namespace

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

double omega_from_wavelength_nm(double lambda0_nm) {
  return 2.0 * std::numbers::pi * kSpeedOfLight / (lambda0_nm * 1e-9);
}

EmitterArray::EmitterArray(std::vector<Vec3> positions_nm, std::vector<Vec3> dipoles,
                           double lambda0_nm, bool allow_coincident, double dipole_magnitude)
    : positions_(std::move(positions_nm)),
      dipoles_(std::move(dipoles)),
      lambda0_nm_(lambda0_nm),
      allow_coincident_(allow_coincident),
      dipole_magnitude_(dipole_magnitude) {
  if (positions_.empty()) throw std::invalid_argument("EmitterArray: need at least one emitter");
  if (positions_.size() != dipoles_.size())
    throw std::invalid_argument("EmitterArray: positions and dipoles differ in length");
  if (!(lambda0_nm_ > 0.0) || !std::isfinite(lambda0_nm_))
    throw std::invalid_argument("EmitterArray: lambda0 must be positive and finite");
  if (!(dipole_magnitude_ > 0.0) || !std::isfinite(dipole_magnitude_))
    throw std::invalid_argument("EmitterArray: dipole magnitude must be positive and finite");
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (!finite3(positions_[i]) || !finite3(dipoles_[i]))
      throw std::invalid_argument("EmitterArray: non-finite coordinate at emitter " +
                                  std::to_string(i));
    if (std::abs(norm(dipoles_[i]) - 1.0) > kUnitTolerance)
      throw std::invalid_argument("EmitterArray: dipole " + std::to_string(i) +
                                  " is not a unit vector");
  }
  if (!allow_coincident_) {
    for (std::size_t i = 0; i < positions_.size(); ++i)
      for (std::size_t j = i + 1; j < positions_.size(); ++j)
        if (positions_[i] == positions_[j])
          throw std::invalid_argument("EmitterArray: emitters " + std::to_string(i) + " and " +
                                      std::to_string(j) + " coincide");
  }
}

EmitterArray EmitterArray::subset(std::span<const std::size_t> indices) const {
  std::vector<Vec3> pos;
  std::vector<Vec3> dip;
  pos.reserve(indices.size());
  dip.reserve(indices.size());
  for (auto i : indices) {
    if (i >= size()) throw std::out_of_range("EmitterArray::subset: index out of range");
    pos.push_back(positions_[i]);
    dip.push_back(dipoles_[i]);
  }
  return EmitterArray(std::move(pos), std::move(dip), lambda0_nm_, allow_coincident_,
                      dipole_magnitude_);
}

EmitterArray build_square_lattice(const LatticeSpec& spec, double lambda0_nm) {
  if (spec.n_side < 1) throw std::invalid_argument("build_square_lattice: n_side must be >= 1");
  if (!std::isfinite(spec.lattice_const_nm) || !std::isfinite(spec.offset_x0_nm) ||
      !std::isfinite(spec.height_nm) || !finite3(spec.dipole_axis))
    throw std::invalid_argument("build_square_lattice: non-finite lattice parameter");
  if (spec.lattice_const_nm < 0.0)
    throw std::invalid_argument("build_square_lattice: lattice constant must be >= 0");
  if (spec.lattice_const_nm == 0.0 && spec.n_side > 1 && !spec.allow_coincident)
    throw std::invalid_argument(
        "build_square_lattice: d = 0 requires the coincident-point (Dicke) flag");

  const int n = spec.n_side;
  const double centre = 0.5 * (n - 1);
  std::vector<Vec3> pos;
  pos.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      pos.push_back({spec.offset_x0_nm + spec.lattice_const_nm * (i - centre),
                     spec.lattice_const_nm * (j - centre), spec.height_nm});
  std::vector<Vec3> dip(pos.size(), spec.dipole_axis);
  return EmitterArray(std::move(pos), std::move(dip), lambda0_nm, spec.allow_coincident);
}

double JitterGrid::value(int k) const {
  if (half_width == 0.0) return 0.0;
  // Endpoints and centre land exactly on -hw, 0, +hw.
  if (2 * k == steps) return 0.0;
  if (k == steps) return half_width;
  return -half_width + k * spacing();
}

std::size_t filled_count(std::size_t n, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("filling fraction must be in [0,1]");
  const auto kept = static_cast<std::size_t>(std::floor(eta * static_cast<double>(n) + 0.5));
  return std::min(kept, n);
}

std::vector<std::size_t> draw_filling_subset(std::size_t n, double eta, RandomStream& rng) {
  const std::size_t keep = filled_count(n, eta);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  // Partial Fisher-Yates: the first `keep` slots become a uniform random subset.
  for (std::size_t i = 0; i < keep; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::array<int, 2>> draw_position_offsets(std::size_t n, const JitterGrid& grid,
                                                      RandomStream& rng) {
  if (grid.steps < 1) throw std::invalid_argument("jitter grid needs steps >= 1");
  if (!(grid.half_width >= 0.0)) throw std::invalid_argument("delta_r must be >= 0");
  std::vector<std::array<int, 2>> out(n);
  const auto count = static_cast<std::uint64_t>(grid.count());
  const double limit = grid.half_width * (1.0 + 1e-12);
  for (auto& o : out) {
    while (true) {
      const int kx = static_cast<int>(rng.uniform_index(count));
      const int ky = static_cast<int>(rng.uniform_index(count));
      if (std::hypot(grid.value(kx), grid.value(ky)) <= limit) {
        o = {kx, ky};
        break;
      }
    }
  }
  return out;
}

std::vector<int> draw_orientation_offsets(std::size_t n, const JitterGrid& grid,
                                          RandomStream& rng) {
  if (grid.steps < 1) throw std::invalid_argument("jitter grid needs steps >= 1");
  if (!(grid.half_width >= 0.0 && grid.half_width <= 180.0))
    throw std::invalid_argument("delta_theta must be in [0, 180] degrees");
  std::vector<int> out(n);
  const auto count = static_cast<std::uint64_t>(grid.count());
  for (auto& k : out) k = static_cast<int>(rng.uniform_index(count));
  return out;
}

Vec3 rotated_dipole(double theta_deg) {
  const auto [c, s] = cos_sin_deg(90.0 + theta_deg);
  return {c, s, 0.0};
}

EmitterArray apply_filling_fraction(const EmitterArray& array, double eta, RandomStream& rng) {
  const auto idx = draw_filling_subset(array.size(), eta, rng);
  if (idx.empty()) throw std::invalid_argument("filling fraction leaves no emitters");
  return array.subset(idx);
}

EmitterArray shift_positions(const EmitterArray& array, const JitterGrid& grid,
                             std::span<const std::array<int, 2>> offsets) {
  if (offsets.size() != array.size()) throw std::invalid_argument("offset count != emitter count");
  std::vector<Vec3> pos(array.positions_nm().begin(), array.positions_nm().end());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    pos[i][0] += grid.value(offsets[i][0]);
    pos[i][1] += grid.value(offsets[i][1]);
  }
  return EmitterArray(std::move(pos), {array.dipoles().begin(), array.dipoles().end()},
                      array.lambda0_nm(), array.allows_coincident(), array.dipole_magnitude());
}

EmitterArray rotate_dipoles(const EmitterArray& array, const JitterGrid& grid,
                            std::span<const int> offsets) {
  if (offsets.size() != array.size()) throw std::invalid_argument("offset count != emitter count");
  std::vector<Vec3> dip(array.size());
  for (std::size_t i = 0; i < dip.size(); ++i) dip[i] = rotated_dipole(grid.value(offsets[i]));
  return EmitterArray({array.positions_nm().begin(), array.positions_nm().end()}, std::move(dip),
                      array.lambda0_nm(), array.allows_coincident(), array.dipole_magnitude());
}

EmitterArray apply_position_jitter(const EmitterArray& array, double delta_r_nm, int steps,
                                   RandomStream& rng) {
  const JitterGrid grid{delta_r_nm, steps};
  const auto offsets = draw_position_offsets(array.size(), grid, rng);
  return shift_positions(array, grid, offsets);
}

EmitterArray apply_orientation_jitter(const EmitterArray& array, double delta_theta_deg, int steps,
                                      RandomStream& rng) {
  const JitterGrid grid{delta_theta_deg, steps};
  const auto offsets = draw_orientation_offsets(array.size(), grid, rng);
  return rotate_dipoles(array, grid, offsets);
}

}  // namespace superrad
