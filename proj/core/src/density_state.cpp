#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "superrad/dynamics.hpp"

namespace superrad {

ExcitationBasis::ExcitationBasis(std::size_t n_emitters) : n_(n_emitters), states_(n_emitters + 1) {
  if (n_emitters == 0 || n_emitters > 24)
    throw std::invalid_argument("ExcitationBasis: emitter count must be in [1, 24]");
  const std::uint32_t dim = std::uint32_t{1} << n_emitters;
  rank_.resize(dim);
  for (std::uint32_t s = 0; s < dim; ++s) {
    auto& manifold = states_[static_cast<std::size_t>(std::popcount(s))];
    rank_[s] = manifold.size();
    manifold.push_back(s);
  }
}

DensityState::DensityState(std::size_t n_emitters) {
  if (n_emitters == 0) throw std::invalid_argument("DensityState: need at least one emitter");
  blocks_.resize(n_emitters + 1);
  // C(N, k) by the multiplicative recurrence.
  std::size_t binom = 1;
  for (std::size_t k = 0; k <= n_emitters; ++k) {
    const auto d = static_cast<Eigen::Index>(binom);
    blocks_[k] = Eigen::MatrixXcd::Zero(d, d);
    binom = binom * (n_emitters - k) / (k + 1);
  }
}

DensityState DensityState::fully_inverted(std::size_t n_emitters) {
  DensityState rho(n_emitters);
  rho.blocks_[n_emitters](0, 0) = 1.0;
  return rho;
}

double DensityState::manifold_population(std::size_t k) const { return blocks_.at(k).trace().real(); }

double DensityState::trace() const {
  double t = 0.0;
  for (std::size_t k = 0; k < blocks_.size(); ++k) t += manifold_population(k);
  return t;
}

double DensityState::mean_excitation() const {
  double n = 0.0;
  for (std::size_t k = 1; k < blocks_.size(); ++k) n += static_cast<double>(k) * manifold_population(k);
  return n;
}

double DensityState::hermiticity_error() const {
  double err = 0.0;
  for (const auto& b : blocks_) err = std::max(err, (b - b.adjoint()).cwiseAbs().maxCoeff());
  return err;
}

double DensityState::min_eigenvalue() const {
  double lo = INFINITY;
  for (const auto& b : blocks_) {
    const Eigen::MatrixXcd h = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

Eigen::MatrixXcd DensityState::to_dense(const ExcitationBasis& basis) const {
  if (basis.n_emitters() != n_emitters()) throw std::invalid_argument("to_dense: basis size mismatch");
  const auto dim = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& states = basis.states(k);
    for (std::size_t a = 0; a < states.size(); ++a)
      for (std::size_t b = 0; b < states.size(); ++b)
        dense(states[a], states[b]) =
            blocks_[k](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return dense;
}

}  // namespace superrad
