#include "superrad/correlations.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "superrad/errors.hpp"

namespace superrad {

namespace {

// Pairwise summation; fixed reduction tree, so results do not depend on how
// the partial sums were produced.
double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void require_pair_source(std::size_t n) {
  if (n < 2) throw std::invalid_argument("G2(0,0) needs at least two emitters");
}

std::vector<double> diagonal_of(const DecayMatrix& m) {
  const auto d = m.diagonal();
  return {d.data(), d.data() + d.size()};
}

}  // namespace

Eigen::MatrixXd SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

SpectralDecomposition decompose(const DecayMatrix& m) {
  const Eigen::MatrixXd sym = 0.5 * (m.rates() + m.rates().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

G2Result g2_direct(const DecayMatrix& m) {
  const std::size_t n = m.size();
  require_pair_source(n);
  require_physical(m);
  const auto& g = m.rates();
  const auto N = static_cast<Eigen::Index>(n);

  std::vector<double> partial(n, 0.0);
  for (Eigen::Index mu = 0; mu < N; ++mu) {
    std::vector<double> row(n, 0.0);
    for (Eigen::Index nu = 0; nu < N; ++nu) {
      if (mu == nu) continue;  // (1 - delta_{mu nu})
      double acc = 0.0;
      for (Eigen::Index gam = 0; gam < N; ++gam) {
        for (Eigen::Index eps = 0; eps < N; ++eps) {
          const int w = (mu == eps && gam == nu) + (mu == gam && nu == eps);
          if (w != 0) acc += w * g(eps, mu) * g(gam, nu);
        }
      }
      row[static_cast<std::size_t>(nu)] = acc;
    }
    partial[static_cast<std::size_t>(mu)] = pairwise_sum(row);
  }
  const double numerator = pairwise_sum(partial);
  const auto diag = diagonal_of(m);
  const double trace = pairwise_sum(diag);
  return {numerator / (trace * trace), G2Method::Direct, n};
}

G2Result g2_spectral(const SpectralDecomposition& spectrum) {
  const auto n = static_cast<std::size_t>(spectrum.eigenvalues.size());
  require_pair_source(n);
  const auto& Gamma = spectrum.eigenvalues;
  const auto& alpha = spectrum.eigenvectors;

  const double total = Gamma.sum();
  const double squares = Gamma.squaredNorm();
  double weighted = 0.0;
  for (Eigen::Index mu = 0; mu < alpha.rows(); ++mu) {
    double w = 0.0;
    for (Eigen::Index i = 0; i < Gamma.size(); ++i) w += Gamma(i) * alpha(mu, i) * alpha(mu, i);
    weighted += w * w;
  }
  const double value = 1.0 + squares / (total * total) - 2.0 * weighted / (total * total);
  return {value, G2Method::Spectral, n};
}

G2Result g2_spectral(const DecayMatrix& m) {
  require_pair_source(m.size());
  require_physical(m);
  return g2_spectral(decompose(m));
}

double g2_independent_limit(std::span<const double> diag) {
  if (diag.size() < 2) throw std::invalid_argument("independent limit needs at least two rates");
  double sum = 0.0;
  double sq = 0.0;
  for (double g : diag) {
    if (!(g > 0.0)) throw std::invalid_argument("single-emitter rates must be positive");
    sum += g;
    sq += g * g;
  }
  return 1.0 - sq / (sum * sum);
}

double g2_dicke_limit(std::span<const double> diag) { return 2.0 * g2_independent_limit(diag); }

double g2_bic_analytic(int n, double beta) {
  if (n < 2) throw std::invalid_argument("g2_bic_analytic: n must be >= 2");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("g2_bic_analytic: beta must be in [0,1]");
  return (1.0 + beta * beta) * (n - 1) / n;
}

BoundsReport check_bounds(const DecayMatrix& m) {
  const auto diag = diagonal_of(m);
  BoundsReport r{};
  r.independent = g2_independent_limit(diag);
  r.dicke = g2_dicke_limit(diag);
  r.value = g2_spectral(m).value;
  r.ordered = r.independent - 1e-9 <= r.value && r.value <= r.dicke + 1e-9;
  return r;
}

}  // namespace superrad
