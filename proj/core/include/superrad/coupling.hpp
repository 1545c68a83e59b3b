#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "superrad/emitters.hpp"

namespace superrad {

namespace constants {
// CODATA 2018, SI units.
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double epsilon0 = 8.8541878128e-12;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double c = 299792458.0;
}  // namespace constants

/// Real symmetric matrix of dissipative rates gamma_{mu nu}, in units of a
/// caller-declared reference rate (gamma0 = 1 unless stated otherwise).
/// Physicality is checked by validate_physical, not on construction, so that
/// unphysical input can be inspected and reported.
class DecayMatrix {
 public:
  DecayMatrix() = default;
  explicit DecayMatrix(Eigen::MatrixXd rates, std::vector<std::size_t> labels = {});

  const Eigen::MatrixXd& rates() const { return rates_; }
  std::size_t size() const { return static_cast<std::size_t>(rates_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return rates_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const std::vector<std::size_t>& labels() const { return labels_; }
  Eigen::VectorXd diagonal() const { return rates_.diagonal(); }

  /// Rows/columns at the given indices, in order; labels follow the rows.
  DecayMatrix subsample(std::span<const std::size_t> indices) const;

 private:
  Eigen::MatrixXd rates_;
  std::vector<std::size_t> labels_;
};

/// Coherent dipole-dipole shifts Delta_{mu nu}; the diagonal is held at zero.
class CouplingMatrix {
 public:
  CouplingMatrix() = default;
  explicit CouplingMatrix(Eigen::MatrixXd shifts);
  static CouplingMatrix zero(std::size_t n);

  const Eigen::MatrixXd& shifts() const { return shifts_; }
  std::size_t size() const { return static_cast<std::size_t>(shifts_.rows()); }
  CouplingMatrix subsample(std::span<const std::size_t> indices) const;

 private:
  Eigen::MatrixXd shifts_;
};

struct FreeSpace {};
struct SingleModeBIC {
  double gamma = 1.0;
  double beta = 0.8179;
};
struct IdealDicke {
  double gamma = 1.0;
};
struct Independent {
  double gamma = 1.0;
};
struct Tabulated {
  DecayMatrix decay;
  std::optional<CouplingMatrix> coupling;
};

using EnvironmentModel = std::variant<FreeSpace, SingleModeBIC, IdealDicke, Independent, Tabulated>;

/// Rejects beta outside [0,1] and non-positive gamma.
void check_environment(const EnvironmentModel& model);
bool is_geometry_free(const EnvironmentModel& model);
std::string environment_name(const EnvironmentModel& model);

struct PairRate {
  double gamma;  // dissipative cross rate / gamma0
  double delta;  // coherent shift / gamma0
};

/// Free-space dyadic Green's function rates between two unit dipoles.
///
/// With k = 2 pi / lambda0, x = k r, A = ua.ub - (ua.r^)(ub.r^) and
/// B = ua.ub - 3 (ua.r^)(ub.r^):
///   gamma/gamma0 = 3/2 [A sin x / x + B (cos x / x^2 - sin x / x^3)]
///   delta/gamma0 = 3/4 [-A cos x / x + B (sin x / x^2 + cos x / x^3)]
/// Small x switches to the Taylor series so the r -> 0 limit is smooth.
/// Coincident points give gamma = 1 and delta = 0 for identical dipoles and
/// throw for distinct ones.
PairRate free_space_pair_rate(const Vec3& pos_a, const Vec3& dip_a, const Vec3& pos_b,
                              const Vec3& dip_b, double lambda0_nm);

struct Matrices {
  DecayMatrix decay;
  CouplingMatrix coupling;
};

Matrices build_matrices(const EmitterArray& array, const EnvironmentModel& model);

/// Geometry-free models (SingleModeBIC, IdealDicke, Independent) need only N.
Matrices build_matrices(std::size_t n, const EnvironmentModel& model);

double purcell_to_rate(double power, double power_free, double gamma0);

struct Violation {
  enum class Kind { NonFinite, Asymmetry, NonPositiveDiagonal, CauchySchwarz, NegativeEigenvalue };
  Kind kind;
  std::size_t i;
  std::size_t j;  // equals i for diagonal/eigenvalue entries
  double magnitude;

  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(Violation::Kind kind) const;
  std::string to_string() const;
};

ValidationReport validate_physical(const DecayMatrix& m);

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Throws ValidationError if the matrix is not physical.
void require_physical(const DecayMatrix& m);

enum class RateUnits { Gamma0, PerSecond };

struct ImportedMatrices {
  DecayMatrix decay;
  std::optional<CouplingMatrix> coupling;
  RateUnits units = RateUnits::Gamma0;
};

/// Parses N lines of N comma-separated decimals (blank lines and lines
/// starting with '#' are skipped). Throws ParseError on malformed data.
Eigen::MatrixXd parse_matrix_csv(std::istream& in);

/// Imports a decay matrix from CSV or JSON (chosen by extension, '.json' ->
/// JSON) and validates it. An optional CSV companion supplies Delta.
ImportedMatrices import_decay_matrix(const std::filesystem::path& path,
                                     const std::optional<std::filesystem::path>& coupling_csv = {});
ImportedMatrices import_decay_matrix_csv(std::istream& in);
ImportedMatrices import_decay_matrix_json(std::istream& in);

/// Parses without validating; used by reporting tools that must show violations.
ImportedMatrices read_decay_matrix(const std::filesystem::path& path,
                                   const std::optional<std::filesystem::path>& coupling_csv = {});

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace superrad
