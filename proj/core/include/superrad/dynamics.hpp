#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "superrad/coupling.hpp"

namespace superrad {

/// Emission rate R(t) on a uniform grid, optionally with the mean excitation n(t).
/// Times are in units of 1/gamma, rates in units of gamma.
struct RateTrace {
  std::vector<double> times;
  std::vector<double> rate;
  std::optional<std::vector<double>> excitation;
};

/// Uniform grid t_k = k t_end / n_steps, k = 0..n_steps.
std::vector<double> uniform_grid(double t_end, std::size_t n_steps);

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
};

/// N two-level emitters: computational basis states grouped by excitation
/// number. Bit mu of a state is set when emitter mu is excited.
class ExcitationBasis {
 public:
  explicit ExcitationBasis(std::size_t n_emitters);

  std::size_t n_emitters() const { return n_; }
  std::size_t manifold_size(std::size_t k) const { return states_[k].size(); }
  const std::vector<std::uint32_t>& states(std::size_t k) const { return states_[k]; }
  /// Position of `state` inside its own excitation manifold.
  std::size_t rank(std::uint32_t state) const { return rank_[state]; }

 private:
  std::size_t n_;
  std::vector<std::vector<std::uint32_t>> states_;
  std::vector<std::size_t> rank_;
};

/// Density matrix of N emitters evolved from the fully inverted state.
///
/// Number-conserving Hamiltonians and pure-decay dissipators never create
/// coherences between different excitation numbers, so only the diagonal
/// blocks rho_k (k = 0..N excitations) are stored.
class DensityState {
 public:
  explicit DensityState(std::size_t n_emitters);
  static DensityState fully_inverted(std::size_t n_emitters);

  std::size_t n_emitters() const { return blocks_.size() - 1; }
  std::size_t dimension() const { return std::size_t{1} << n_emitters(); }
  const Eigen::MatrixXcd& block(std::size_t k) const { return blocks_[k]; }
  Eigen::MatrixXcd& block(std::size_t k) { return blocks_[k]; }

  double trace() const;
  double manifold_population(std::size_t k) const;
  double mean_excitation() const;
  /// max |rho - rho^dagger| over all stored entries.
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// Full 2^N x 2^N matrix in the computational basis (small N only).
  Eigen::MatrixXcd to_dense(const ExcitationBasis& basis) const;

 private:
  std::vector<Eigen::MatrixXcd> blocks_;
};

struct DensityDiagnostics {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
};

struct LindbladOptions {
  std::size_t max_emitters = 12;
  IntegratorOptions integrator{};
  // Check trace, Hermiticity and the eigenvalue floor at every output time.
  bool check_state = true;
};

struct LindbladRun {
  RateTrace trace;
  DensityDiagnostics diagnostics;
  DensityState final_state;
};

/// Integrates
///   d rho/dt = -i [H, rho] + sum_{mu nu} gamma_{mu nu} (sigma_mu rho sigma_nu^+
///              - 1/2 {sigma_nu^+ sigma_mu, rho}),   H = sum_{mu != nu} Delta_{mu nu} sigma_mu^+ sigma_nu
/// in the frame rotating at omega0, from rho(0) = |e..e><e..e|, and records
/// R(t) = sum_{mu nu} gamma_{mu nu} Tr[sigma_mu^+ sigma_nu rho(t)] and n(t).
///
/// Throws std::invalid_argument when N exceeds options.max_emitters or the
/// matrices disagree in size, ValidationError for unphysical decay matrices,
/// and NumericalError when a state invariant breaks (trace 1e-9, Hermiticity
/// 1e-9, eigenvalues below -1e-7).
LindbladRun lindblad_evolve(const DecayMatrix& decay, const CouplingMatrix& coupling, double t_end,
                            std::size_t n_steps, const LindbladOptions& options = {});

RateTrace lindblad_rate_trace(const DecayMatrix& decay, const CouplingMatrix& coupling,
                              double t_end, std::size_t n_steps,
                              const LindbladOptions& options = {});

struct LadderState {
  std::vector<double> populations;  // P_0 .. P_N
};

/// Time derivative of the manifold populations for mixed collective
/// (weight beta) and independent (weight 1 - beta) decay.
std::vector<double> ladder_derivative(const LadderState& state, double gamma, double beta);

/// Total downward flux gamma beta sum n(N-n+1) P_n + gamma (1-beta) sum n P_n.
double ladder_emission_rate(const LadderState& state, double gamma, double beta);

/// Birth-death chain integrated from P_N = 1. Throws NumericalError if a
/// population leaves [0, 1] by more than 100 abs_tol or the total drifts by
/// more than 1e-9.
RateTrace ladder_rate_trace(int n, double gamma, double beta, double t_end, std::size_t n_steps,
                            const IntegratorOptions& options = {});

/// Mean-field ODE dn/dt = -gamma (1 + beta N) n + gamma beta n^2, n(0) = N; R = -dn/dt.
RateTrace meanfield_rate_trace(int n, double gamma, double beta, double t_end, std::size_t n_steps,
                               const IntegratorOptions& options = {});

/// Below this beta the closed form switches to independent exponential decay.
inline constexpr double kBetaMin = 1e-6;

struct ClosedFormRate {
  double rate;
  double t_peak;         // time of the rate maximum on t >= 0
  double t0_exact;       // centre of the sech^2 burst, ln(beta N) / (gamma (1 + beta N))
  double t0_quasi_dicke; // ln(beta N) / (gamma beta N), valid for beta N >> 1
  bool exponential_branch;
};

/// Exact solution of the mean-field ODE:
///   R(t) = gamma (1 + beta N)^2 / (4 beta) sech^2[gamma (1 + beta N)/2 (t - t0)]
/// with t0 = ln(beta N) / (gamma (1 + beta N)). For beta <= kBetaMin returns
/// gamma N exp(-gamma t) with t_peak = 0.
ClosedFormRate closed_form_rate(int n, double gamma, double beta, double t);

RateTrace closed_form_trace(int n, double gamma, double beta, double t_end, std::size_t n_steps);

struct TraceSummary {
  double peak_rate;
  double peak_time;
  double integrated;  // trapezoid integral plus exponential tail estimate
};

/// Peak of the sampled trace and the emitted photon number. Integration stops
/// once R drops below 1e-6 of the peak; the remainder is extrapolated with an
/// exponential fitted to the last two retained samples.
TraceSummary summarize(const RateTrace& trace);

}  // namespace superrad
