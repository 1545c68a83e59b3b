#include "superrad/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace superrad {

namespace {

// Below this k r the closed form loses digits to cancellation; use the series.
constexpr double kSeriesCutoff = 0.1;

// sin x / x and cos x / x^2 - sin x / x^3 by Taylor series (x small).
std::array<double, 2> small_x_kernels(double x) {
  const double x2 = x * x;
  double s1 = 0.0;
  double s2 = 0.0;
  double term = 1.0;  // x^{2k} / (2k+1)!, signed
  for (int k = 0; k <= 6; ++k) {
    if (k > 0) term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
    s1 += term;
    // s2 series: sum_{k>=1} (-1)^k 2k x^{2k-2} / (2k+1)! = sum 2k term / x^2
    if (k >= 1) s2 += 2.0 * k * (term / x2);
  }
  return {s1, s2};
}

Eigen::MatrixXd pick(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto i = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]);
      const auto j = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]);
      if (i >= m.rows() || j >= m.rows()) throw std::out_of_range("subsample index out of range");
      out(a, b) = m(i, j);
    }
  return out;
}

}  // namespace

DecayMatrix::DecayMatrix(Eigen::MatrixXd rates, std::vector<std::size_t> labels)
    : rates_(std::move(rates)), labels_(std::move(labels)) {
  if (rates_.rows() != rates_.cols()) throw std::invalid_argument("DecayMatrix: matrix must be square");
  if (!labels_.empty() && labels_.size() != size())
    throw std::invalid_argument("DecayMatrix: label count must match dimension");
}

DecayMatrix DecayMatrix::subsample(std::span<const std::size_t> indices) const {
  std::vector<std::size_t> labels;
  labels.reserve(indices.size());
  for (auto i : indices) labels.push_back(labels_.empty() ? i : labels_.at(i));
  return DecayMatrix(pick(rates_, indices), std::move(labels));
}

CouplingMatrix::CouplingMatrix(Eigen::MatrixXd shifts) : shifts_(std::move(shifts)) {
  if (shifts_.rows() != shifts_.cols())
    throw std::invalid_argument("CouplingMatrix: matrix must be square");
  const double scale = shifts_.size() ? shifts_.cwiseAbs().maxCoeff() : 0.0;
  if ((shifts_ - shifts_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("CouplingMatrix: matrix must be symmetric");
  shifts_.diagonal().setZero();
}

CouplingMatrix CouplingMatrix::zero(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return CouplingMatrix(Eigen::MatrixXd::Zero(k, k));
}

CouplingMatrix CouplingMatrix::subsample(std::span<const std::size_t> indices) const {
  return CouplingMatrix(pick(shifts_, indices));
}

void check_environment(const EnvironmentModel& model) {
  auto positive = [](double g, const char* what) {
    if (!(g > 0.0) || !std::isfinite(g))
      throw std::invalid_argument(std::string(what) + ": gamma must be positive");
  };
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SingleModeBIC>) {
          positive(m.gamma, "SingleModeBIC");
          if (!(m.beta >= 0.0 && m.beta <= 1.0))
            throw std::invalid_argument("SingleModeBIC: beta must be in [0,1]");
        } else if constexpr (std::is_same_v<T, IdealDicke>) {
          positive(m.gamma, "IdealDicke");
        } else if constexpr (std::is_same_v<T, Independent>) {
          positive(m.gamma, "Independent");
        }
      },
      model);
}

bool is_geometry_free(const EnvironmentModel& model) {
  return std::holds_alternative<SingleModeBIC>(model) || std::holds_alternative<IdealDicke>(model) ||
         std::holds_alternative<Independent>(model);
}

std::string environment_name(const EnvironmentModel& model) {
  static constexpr const char* names[] = {"freespace", "bic", "dicke", "independent", "tabulated"};
  return names[model.index()];
}

PairRate free_space_pair_rate(const Vec3& pos_a, const Vec3& dip_a, const Vec3& pos_b,
                              const Vec3& dip_b, double lambda0_nm) {
  if (!(lambda0_nm > 0.0)) throw std::invalid_argument("free_space_pair_rate: lambda0 must be > 0");
  const Vec3 r{pos_b[0] - pos_a[0], pos_b[1] - pos_a[1], pos_b[2] - pos_a[2]};
  const double dist = norm(r);
  const double uu = dot(dip_a, dip_b);
  if (dist == 0.0) {
    if (dip_a != dip_b) throw std::invalid_argument("coincident emitters");
    return {1.0, 0.0};
  }
  const Vec3 rhat{r[0] / dist, r[1] / dist, r[2] / dist};
  const double proj = dot(dip_a, rhat) * dot(dip_b, rhat);
  const double A = uu - proj;
  const double B = uu - 3.0 * proj;
  const double x = 2.0 * std::numbers::pi / lambda0_nm * dist;
  const double s = std::sin(x);
  const double c = std::cos(x);

  double sinc = 0.0;
  double near = 0.0;
  if (x < kSeriesCutoff) {
    const auto k = small_x_kernels(x);
    sinc = k[0];
    near = k[1];
  } else {
    sinc = s / x;
    near = c / (x * x) - s / (x * x * x);
  }
  const double gamma = 1.5 * (A * sinc + B * near);
  const double delta = 0.75 * (-A * c / x + B * (s / (x * x) + c / (x * x * x)));
  return {gamma, delta};
}

Matrices build_matrices(std::size_t n, const EnvironmentModel& model) {
  check_environment(model);
  if (n == 0) throw std::invalid_argument("build_matrices: need at least one emitter");
  const auto k = static_cast<Eigen::Index>(n);
  return std::visit(
      [&](const auto& m) -> Matrices {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SingleModeBIC>) {
          Eigen::MatrixXd g = Eigen::MatrixXd::Constant(k, k, m.beta * m.gamma);
          g.diagonal().setConstant(m.gamma);
          return {DecayMatrix(std::move(g)), CouplingMatrix::zero(n)};
        } else if constexpr (std::is_same_v<T, IdealDicke>) {
          return {DecayMatrix(Eigen::MatrixXd::Constant(k, k, m.gamma)), CouplingMatrix::zero(n)};
        } else if constexpr (std::is_same_v<T, Independent>) {
          Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
          g.diagonal().setConstant(m.gamma);
          return {DecayMatrix(std::move(g)), CouplingMatrix::zero(n)};
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          if (m.decay.size() != n)
            throw std::invalid_argument("tabulated matrix dimension " + std::to_string(m.decay.size()) +
                                        " does not match emitter count " + std::to_string(n));
          if (m.coupling && m.coupling->size() != n)
            throw std::invalid_argument("tabulated coupling matrix dimension mismatch");
          require_physical(m.decay);
          return {m.decay, m.coupling ? *m.coupling : CouplingMatrix::zero(n)};
        } else {
          throw std::invalid_argument("free-space matrices need emitter geometry");
        }
      },
      model);
}

Matrices build_matrices(const EmitterArray& array, const EnvironmentModel& model) {
  if (!std::holds_alternative<FreeSpace>(model)) return build_matrices(array.size(), model);

  const auto n = static_cast<Eigen::Index>(array.size());
  Eigen::MatrixXd g(n, n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const auto pos = array.positions_nm();
  const auto dip = array.dipoles();
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      const auto pr = free_space_pair_rate(pos[ui], dip[ui], pos[uj], dip[uj], array.lambda0_nm());
      g(i, j) = g(j, i) = pr.gamma;
      d(i, j) = d(j, i) = pr.delta;
    }
  }
  return {DecayMatrix(std::move(g)), CouplingMatrix(std::move(d))};
}

double purcell_to_rate(double power, double power_free, double gamma0) {
  if (!(power_free > 0.0)) throw std::invalid_argument("purcell_to_rate: P0 must be positive");
  if (!(power >= 0.0)) throw std::invalid_argument("purcell_to_rate: P must be non-negative");
  if (!(gamma0 > 0.0)) throw std::invalid_argument("purcell_to_rate: gamma0 must be positive");
  return power / power_free * gamma0;
}

std::string Violation::describe() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind) {
    case Kind::NonFinite:
      os << "non-finite entry at (" << i << "," << j << ")";
      break;
    case Kind::Asymmetry:
      os << "asymmetry at (" << i << "," << j << "): |g_ij - g_ji| = " << magnitude;
      break;
    case Kind::NonPositiveDiagonal:
      os << "non-positive diagonal at (" << i << "," << i << "): " << magnitude;
      break;
    case Kind::CauchySchwarz:
      os << "Cauchy-Schwarz violation at (" << i << "," << j
         << "): |g_ij| / sqrt(g_ii g_jj) = " << magnitude;
      break;
    case Kind::NegativeEigenvalue:
      os << "negative eigenvalue #" << i << ": " << magnitude;
      break;
  }
  return os.str();
}

bool ValidationReport::has(Violation::Kind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& v : violations) out += v.describe() + "\n";
  return out;
}

ValidationReport validate_physical(const DecayMatrix& m) {
  ValidationReport report;
  const auto& g = m.rates();
  const Eigen::Index n = g.rows();
  if (n == 0) return report;

  bool finite = true;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!std::isfinite(g(i, j))) {
        report.violations.push_back({Violation::Kind::NonFinite, static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(j), g(i, j)});
        finite = false;
      }
  if (!finite) return report;

  const double scale = g.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double asym = std::abs(g(i, j) - g(j, i));
      if (asym > 1e-12 * scale)
        report.violations.push_back({Violation::Kind::Asymmetry, static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(j), asym});
    }
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(g(i, i) > 0.0))
      report.violations.push_back({Violation::Kind::NonPositiveDiagonal,
                                   static_cast<std::size_t>(i), static_cast<std::size_t>(i),
                                   g(i, i)});
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || g(i, i) <= 0.0 || g(j, j) <= 0.0) continue;
      const double bound = std::sqrt(g(i, i) * g(j, j));
      if (std::abs(g(i, j)) > bound * (1.0 + 1e-9))
        report.violations.push_back({Violation::Kind::CauchySchwarz, static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(j), std::abs(g(i, j)) / bound});
    }

  const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const double floor = -1e-9 * std::abs(sym.trace());
  for (Eigen::Index k = 0; k < n; ++k)
    if (es.eigenvalues()(k) < floor)
      report.violations.push_back({Violation::Kind::NegativeEigenvalue, static_cast<std::size_t>(k),
                                   static_cast<std::size_t>(k), es.eigenvalues()(k)});
  return report;
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("unphysical decay matrix:\n" + report.to_string()),
      report_(std::move(report)) {}

void require_physical(const DecayMatrix& m) {
  auto report = validate_physical(m);
  if (!report.ok()) throw ValidationError(std::move(report));
}

}  // namespace superrad
