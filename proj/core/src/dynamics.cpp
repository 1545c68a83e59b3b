#include "superrad/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Eigenvalues>

#include "superrad/errors.hpp"

namespace superrad {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;
using cplx = std::complex<double>;

constexpr double kTraceTolerance = 1e-9;
constexpr double kHermiticityTolerance = 1e-9;
constexpr double kEigenvalueFloor = -1e-7;

void check_grid(double t_end, std::size_t n_steps) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
  if (n_steps == 0) throw std::invalid_argument("n_steps must be >= 1");
}

void check_rate_params(int n, double gamma, double beta) {
  if (n < 1) throw std::invalid_argument("emitter count must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in [0,1]");
}

// Dense-output Dormand-Prince 5(4) sampled at the requested times.
template <class System, class Observer>
void integrate_on_grid(System&& system, State& x, const std::vector<double>& times,
                       const IntegratorOptions& opt, double first_step, Observer&& observer) {
  auto stepper =
      odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, std::forward<System>(system), x, times.begin(), times.end(),
                            first_step, std::forward<Observer>(observer),
                            odeint::max_step_checker(1000000));
  } catch (const odeint::odeint_error& e) {
    throw NumericalError(std::string("ODE integration failed: ") + e.what());
  }
}

// Sparse entry of H_eff = sum (Delta_{mu nu} - i gamma_{mu nu}/2) sigma_mu^+ sigma_nu
// inside one excitation manifold: row `row`, real parts kept separate so the
// same table yields K = sum gamma_{mu nu} sigma_mu^+ sigma_nu for R(t).
struct HopEntry {
  std::uint32_t row;
  double delta;
  double gamma;
};

class LindbladSystem {
 public:
  LindbladSystem(const DecayMatrix& decay, const CouplingMatrix& coupling)
      : n_(decay.size()), basis_(n_), g_(decay.rates()), d_(coupling.shifts()) {
    offsets_.resize(n_ + 2);
    offsets_[0] = 0;
    for (std::size_t k = 0; k <= n_; ++k) {
      const auto dk = basis_.manifold_size(k);
      offsets_[k + 1] = offsets_[k] + dk * dk;
    }
    build_hops();
    build_raises();
    scratch_.resize(offsets_[n_ + 1] - offsets_[n_]);
    std::size_t largest = 0;
    for (std::size_t k = 0; k <= n_; ++k) largest = std::max(largest, basis_.manifold_size(k));
    scratch_.assign(largest * largest, cplx{});
  }

  std::size_t complex_size() const { return offsets_[n_ + 1]; }

  State initial_state() const {
    State x(2 * complex_size(), 0.0);
    as_complex(x)[offsets_[n_]] = 1.0;  // |e..e><e..e|
    return x;
  }

  void operator()(const State& x, State& dxdt, double /*t*/) {
    const cplx* rho = as_complex(x);
    cplx* out = as_complex(dxdt);
    std::fill(out, out + complex_size(), cplx{});

    for (std::size_t k = 0; k <= n_; ++k) {
      const std::size_t dk = basis_.manifold_size(k);
      const cplx* r = rho + offsets_[k];
      cplx* o = out + offsets_[k];

      // X = H_eff rho_k (row-major blocks).
      std::fill(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(dk * dk), cplx{});
      const auto& cols = hops_[k];
      for (std::size_t c = 0; c < dk; ++c) {
        const cplx* rc = r + c * dk;
        for (const auto& h : cols[c]) {
          const cplx hv(h.delta, -0.5 * h.gamma);
          cplx* xa = scratch_.data() + h.row * dk;
          for (std::size_t b = 0; b < dk; ++b) xa[b] += hv * rc[b];
        }
      }
      // -i (X - X^dagger), using rho = rho^dagger.
      for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t b = 0; b < dk; ++b) {
          const cplx v = scratch_[a * dk + b] - std::conj(scratch_[b * dk + a]);
          o[a * dk + b] += cplx(v.imag(), -v.real());
        }

      // Jumps sum gamma_{mu nu} sigma_mu rho_{k+1} sigma_nu^+ land in block k.
      if (k < n_) {
        const std::size_t dup = basis_.manifold_size(k + 1);
        const cplx* rup = rho + offsets_[k + 1];
        const auto& raise = raises_[k];
        for (std::size_t a = 0; a < dk; ++a)
          for (std::size_t b = 0; b < dk; ++b) {
            cplx acc{};
            for (const auto& [mu, ra] : raise[a])
              for (const auto& [nu, rb] : raise[b]) acc += g_(mu, nu) * rup[ra * dup + rb];
            o[a * dk + b] += acc;
          }
      }
    }
  }

  // R = Tr[K rho] with K = sum gamma_{mu nu} sigma_mu^+ sigma_nu.
  double emission_rate(const State& x) const {
    const cplx* rho = as_complex(x);
    double rate = 0.0;
    for (std::size_t k = 1; k <= n_; ++k) {
      const std::size_t dk = basis_.manifold_size(k);
      const cplx* r = rho + offsets_[k];
      for (std::size_t c = 0; c < dk; ++c)
        for (const auto& h : hops_[k][c]) rate += h.gamma * r[c * dk + h.row].real();
    }
    return rate;
  }

  DensityState to_state(const State& x) const {
    DensityState s(n_);
    const cplx* rho = as_complex(x);
    for (std::size_t k = 0; k <= n_; ++k) {
      const auto dk = static_cast<Eigen::Index>(basis_.manifold_size(k));
      s.block(k) = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          rho + offsets_[k], dk, dk);
    }
    return s;
  }

 private:
  static cplx* as_complex(State& x) { return reinterpret_cast<cplx*>(x.data()); }
  static const cplx* as_complex(const State& x) { return reinterpret_cast<const cplx*>(x.data()); }

  void build_hops() {
    hops_.resize(n_ + 1);
    for (std::size_t k = 0; k <= n_; ++k) {
      const auto& states = basis_.states(k);
      hops_[k].resize(states.size());
      for (std::size_t c = 0; c < states.size(); ++c) {
        const std::uint32_t s = states[c];
        auto& col = hops_[k][c];
        double diag = 0.0;
        for (std::size_t nu = 0; nu < n_; ++nu) {
          if (!(s >> nu & 1u)) continue;
          const auto inu = static_cast<Eigen::Index>(nu);
          diag += g_(inu, inu);
          for (std::size_t mu = 0; mu < n_; ++mu) {
            if (s >> mu & 1u) continue;
            const auto imu = static_cast<Eigen::Index>(mu);
            const std::uint32_t t = (s & ~(1u << nu)) | (1u << mu);
            if (g_(imu, inu) == 0.0 && d_(imu, inu) == 0.0) continue;
            col.push_back({static_cast<std::uint32_t>(basis_.rank(t)), d_(imu, inu), g_(imu, inu)});
          }
        }
        col.push_back({static_cast<std::uint32_t>(c), 0.0, diag});
      }
    }
  }

  // raises_[k][a]: (mu, rank of a + mu in manifold k+1) for each mu not in a.
  void build_raises() {
    raises_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const auto& states = basis_.states(k);
      raises_[k].resize(states.size());
      for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t mu = 0; mu < n_; ++mu)
          if (!(states[a] >> mu & 1u))
            raises_[k][a].emplace_back(static_cast<Eigen::Index>(mu),
                                       basis_.rank(states[a] | (1u << mu)));
    }
  }

  std::size_t n_;
  ExcitationBasis basis_;
  Eigen::MatrixXd g_;
  Eigen::MatrixXd d_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<std::vector<HopEntry>>> hops_;
  std::vector<std::vector<std::vector<std::pair<Eigen::Index, std::size_t>>>> raises_;
  std::vector<cplx> scratch_;
};

// Populations near zero carry integrator noise of order abs_tol.
void check_ladder_state(const State& p, double slack) {
  double total = 0.0;
  for (double v : p) {
    if (v < -slack || v > 1.0 + slack) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e", v);
      throw NumericalError(std::string("ladder population left [0,1]: ") + buf);
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw NumericalError("ladder populations no longer sum to one: " + std::to_string(total));
}

double sech_squared(double x) {
  const double e = std::exp(-2.0 * std::abs(x));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

std::vector<double> uniform_grid(double t_end, std::size_t n_steps) {
  check_grid(t_end, n_steps);
  std::vector<double> t(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k)
    t[k] = t_end * static_cast<double>(k) / static_cast<double>(n_steps);
  return t;
}

LindbladRun lindblad_evolve(const DecayMatrix& decay, const CouplingMatrix& coupling, double t_end,
                            std::size_t n_steps, const LindbladOptions& options) {
  const std::size_t n = decay.size();
  if (n == 0) throw std::invalid_argument("lindblad: empty decay matrix");
  if (n > options.max_emitters)
    throw std::invalid_argument("lindblad: " + std::to_string(n) + " emitters exceed the cap of " +
                                std::to_string(options.max_emitters));
  if (coupling.size() != n) throw std::invalid_argument("lindblad: coupling matrix size mismatch");
  require_physical(decay);
  const auto times = uniform_grid(t_end, n_steps);

  LindbladSystem system(decay, coupling);
  State x = system.initial_state();

  LindbladRun run{RateTrace{}, DensityDiagnostics{}, DensityState(n)};
  run.trace.times = times;
  run.trace.rate.reserve(times.size());
  std::vector<double> excitation;
  excitation.reserve(times.size());
  run.diagnostics.min_eigenvalue = INFINITY;

  auto observer = [&](const State& s, double) {
    run.trace.rate.push_back(system.emission_rate(s));
    const DensityState rho = system.to_state(s);
    excitation.push_back(rho.mean_excitation());
    if (!options.check_state) return;
    auto& diag = run.diagnostics;
    diag.max_trace_error = std::max(diag.max_trace_error, std::abs(rho.trace() - 1.0));
    diag.max_hermiticity_error = std::max(diag.max_hermiticity_error, rho.hermiticity_error());
    diag.min_eigenvalue = std::min(diag.min_eigenvalue, rho.min_eigenvalue());
    if (diag.max_trace_error > kTraceTolerance || diag.max_hermiticity_error > kHermiticityTolerance ||
        diag.min_eigenvalue < kEigenvalueFloor)
      throw NumericalError("density matrix invariant violated (trace error " +
                           std::to_string(diag.max_trace_error) + ", min eigenvalue " +
                           std::to_string(diag.min_eigenvalue) + ")");
  };

  const double scale = std::max(decay.rates().cwiseAbs().maxCoeff(), 1e-300);
  integrate_on_grid(system, x, times, options.integrator, 1e-3 / (scale * static_cast<double>(n)),
                    observer);
  run.trace.excitation = std::move(excitation);
  run.final_state = system.to_state(x);
  if (!options.check_state) run.diagnostics.min_eigenvalue = run.final_state.min_eigenvalue();
  return run;
}

RateTrace lindblad_rate_trace(const DecayMatrix& decay, const CouplingMatrix& coupling, double t_end,
                              std::size_t n_steps, const LindbladOptions& options) {
  return lindblad_evolve(decay, coupling, t_end, n_steps, options).trace;
}

std::vector<double> ladder_derivative(const LadderState& state, double gamma, double beta) {
  const auto& p = state.populations;
  const std::size_t N = p.size() - 1;
  std::vector<double> dp(p.size(), 0.0);
  for (std::size_t n = 0; n <= N; ++n) {
    const double up = n < N ? p[n + 1] : 0.0;
    const auto nd = static_cast<double>(n);
    const auto Nd = static_cast<double>(N);
    dp[n] = gamma * beta * ((Nd - nd) * (nd + 1.0) * up - nd * (Nd - nd + 1.0) * p[n]) +
            gamma * (1.0 - beta) * ((nd + 1.0) * up - nd * p[n]);
  }
  return dp;
}

double ladder_emission_rate(const LadderState& state, double gamma, double beta) {
  const auto& p = state.populations;
  const auto Nd = static_cast<double>(p.size() - 1);
  double collective = 0.0;
  double independent = 0.0;
  for (std::size_t n = 1; n < p.size(); ++n) {
    const auto nd = static_cast<double>(n);
    collective += nd * (Nd - nd + 1.0) * p[n];
    independent += nd * p[n];
  }
  return gamma * beta * collective + gamma * (1.0 - beta) * independent;
}

RateTrace ladder_rate_trace(int n, double gamma, double beta, double t_end, std::size_t n_steps,
                            const IntegratorOptions& options) {
  check_rate_params(n, gamma, beta);
  const auto times = uniform_grid(t_end, n_steps);
  LadderState state{State(static_cast<std::size_t>(n) + 1, 0.0)};
  state.populations.back() = 1.0;

  RateTrace trace;
  trace.times = times;
  std::vector<double> excitation;
  auto system = [&](const State& p, State& dp, double) {
    dp = ladder_derivative(LadderState{p}, gamma, beta);
  };
  auto observer = [&](const State& p, double) {
    check_ladder_state(p, 100.0 * options.abs_tol);
    const LadderState s{p};
    trace.rate.push_back(ladder_emission_rate(s, gamma, beta));
    double mean = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) mean += static_cast<double>(k) * p[k];
    excitation.push_back(mean);
  };
  integrate_on_grid(system, state.populations, times, options, 1e-3 / (gamma * n * n), observer);
  trace.excitation = std::move(excitation);
  return trace;
}

RateTrace meanfield_rate_trace(int n, double gamma, double beta, double t_end, std::size_t n_steps,
                               const IntegratorOptions& options) {
  check_rate_params(n, gamma, beta);
  const auto times = uniform_grid(t_end, n_steps);
  const double a = gamma * (1.0 + beta * n);
  const double b = gamma * beta;
  // Integrated in u = ln n, so the absolute tolerance bounds the relative error
  // of n (and of R) even deep in the exponential tail.
  State x{std::log(static_cast<double>(n))};

  RateTrace trace;
  trace.times = times;
  std::vector<double> excitation;
  auto system = [&](const State& s, State& ds, double) { ds[0] = -a + b * std::exp(s[0]); };
  auto observer = [&](const State& s, double) {
    const double nn = std::exp(s[0]);
    trace.rate.push_back(nn * (a - b * nn));
    excitation.push_back(nn);
  };
  integrate_on_grid(system, x, times, options, 1e-3 / a, observer);
  trace.excitation = std::move(excitation);
  return trace;
}

ClosedFormRate closed_form_rate(int n, double gamma, double beta, double t) {
  check_rate_params(n, gamma, beta);
  const double N = n;
  if (beta <= kBetaMin) {
    return {gamma * N * std::exp(-gamma * t), 0.0, 0.0, 0.0, true};
  }
  const double a = gamma * (1.0 + beta * N);
  const double log_bn = std::log(beta * N);
  const double t0 = log_bn / a;
  const double rate = a * a / (4.0 * gamma * beta) * sech_squared(0.5 * a * (t - t0));
  return {rate, std::max(t0, 0.0), t0, log_bn / (gamma * beta * N), false};
}

RateTrace closed_form_trace(int n, double gamma, double beta, double t_end, std::size_t n_steps) {
  RateTrace trace;
  trace.times = uniform_grid(t_end, n_steps);
  for (double t : trace.times) trace.rate.push_back(closed_form_rate(n, gamma, beta, t).rate);
  return trace;
}

TraceSummary summarize(const RateTrace& trace) {
  const auto& t = trace.times;
  const auto& r = trace.rate;
  if (t.size() != r.size() || t.size() < 2) throw std::invalid_argument("summarize: need >= 2 samples");
  const auto peak_it = std::max_element(r.begin(), r.end());
  const auto peak = static_cast<std::size_t>(peak_it - r.begin());
  TraceSummary s{*peak_it, t[peak], 0.0};

  std::size_t last = r.size() - 1;
  for (std::size_t i = peak + 1; i < r.size(); ++i)
    if (r[i] < 1e-6 * s.peak_rate) {
      last = i;
      break;
    }
  for (std::size_t i = 1; i <= last; ++i) s.integrated += 0.5 * (r[i] + r[i - 1]) * (t[i] - t[i - 1]);
  if (last >= 1 && r[last] > 0.0 && r[last - 1] > r[last]) {
    const double kappa = std::log(r[last - 1] / r[last]) / (t[last] - t[last - 1]);
    s.integrated += r[last] / kappa;
  }
  return s;
}

}  // namespace superrad
