#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "superrad/coupling.hpp"

namespace superrad {

/// Eigenpairs of a symmetric decay matrix: eigenvalues Gamma_i (ascending)
/// and orthonormal eigenvectors stored as the columns of `eigenvectors`,
/// so eigenvectors(mu, i) is the mu-th component of the i-th eigenvector.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  Eigen::MatrixXd reconstruct() const;
};

/// Decomposes (M + M^T) / 2. Throws NumericalError if the solver fails.
SpectralDecomposition decompose(const DecayMatrix& m);

enum class G2Method { Direct, Spectral, Analytic };

struct G2Result {
  double value;
  G2Method method;
  std::size_t n_emitters;
};

/// Zero-delay second-order correlation of the fully inverted array, by the
/// literal O(N^4) quadruple sum over gamma_{eps mu} gamma_{gam nu}
/// (1 - delta_{mu nu})(delta_{mu eps} delta_{gam nu} + delta_{mu gam} delta_{nu eps}),
/// normalised by (sum_mu gamma_{mu mu})^2.
///
/// Requires N >= 2 and a physical matrix (ValidationError otherwise).
G2Result g2_direct(const DecayMatrix& m);

/// Same quantity from the eigendecomposition in O(N^3):
///   1 + sum_i Gamma_i^2 / S^2 - 2 sum_mu (sum_i Gamma_i |alpha_{i,mu}|^2)^2 / S^2,
/// with S = sum_i Gamma_i, i indexing eigenpairs and mu emitters.
G2Result g2_spectral(const DecayMatrix& m);
G2Result g2_spectral(const SpectralDecomposition& spectrum);

/// 1 - sum gamma_mu^2 / (sum gamma_mu)^2 (no mutual coupling).
double g2_independent_limit(std::span<const double> diag);
/// Twice the independent limit (maximal coupling gamma_{mu nu} = sqrt(gamma_mu gamma_nu)).
double g2_dicke_limit(std::span<const double> diag);
/// (1 + beta^2)(n - 1)/n for the uniform single-mode matrix.
double g2_bic_analytic(int n, double beta);

struct BoundsReport {
  double independent;
  double value;
  double dicke;
  bool ordered;  // independent <= value <= dicke with 1e-9 slack
};

BoundsReport check_bounds(const DecayMatrix& m);

}  // namespace superrad
