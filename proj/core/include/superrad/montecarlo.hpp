#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "superrad/coupling.hpp"
#include "superrad/emitters.hpp"

namespace superrad {

struct FillingMode {
  double eta = 1.0;
};
struct PositionMode {
  double delta_r_nm = 10.0;
  int steps = 50;  // grid spacing 2 delta_r / steps
};
struct OrientationMode {
  double delta_theta_deg = 30.0;
  int steps = 100;
};

using DisorderMode = std::variant<FillingMode, PositionMode, OrientationMode>;

std::string mode_name(const DisorderMode& mode);
/// 10^4 samples for filling, 10^3 for position and orientation.
std::size_t default_sample_count(const DisorderMode& mode);

struct DisorderConfig {
  LatticeSpec lattice{};
  double lambda0_nm = 708.9;
  EnvironmentModel environment = SingleModeBIC{};
  DisorderMode mode = FillingMode{};
  std::size_t n_samples = 1000;
  std::uint64_t master_seed = 1;
  std::size_t threads = 0;                  // 0: hardware concurrency
  std::size_t cache_capacity = 1u << 20;    // pair-rate memo entries
};

/// Rejects n_samples == 0, out-of-range mode parameters and the
/// Tabulated + position/orientation combination.
void check_config(const DisorderConfig& config);

struct SummaryStats {
  double mean;
  double std;       // sample standard deviation (n - 1)
  double skewness;  // sum (x - mean)^3 / ((n - 1) std^3); NaN when std == 0
  bool skewness_defined;
};

/// Mean, sample standard deviation and the (n-1)-normalised skewness.
SummaryStats summary_stats(std::span<const double> samples);

struct ErrorBars {
  double lower;
  double upper;
  bool degenerate;  // |skewness| >= 2: one bar collapses to zero or below
};

/// Half-widths std (1 - skew/2) below and std (1 + skew/2) above the mean.
ErrorBars skew_adjusted_errorbars(double mean, double std, double skewness);

struct Histogram {
  std::vector<double> edges;  // n_bins + 1
  std::vector<std::size_t> counts;
};

/// Uniform bins over `range`, or over [min, max] of the data. Samples outside
/// an explicit range are not counted; the right edge is inclusive.
Histogram histogram(std::span<const double> samples, std::size_t n_bins,
                    std::optional<std::pair<double, double>> range = {});

struct DisorderDistribution {
  std::vector<double> samples;
  SummaryStats stats;
  std::string config_hash;
};

struct DisorderRunInfo {
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

/// Runs n_samples independent disorder realisations and evaluates
/// G2(0,0) of each with g2_spectral. Sample i draws from
/// RandomStream::derive(master_seed, i); the output is identical for any
/// thread count. Free-space pair rates of discretised geometries are memoised
/// across samples.
DisorderDistribution run_disorder(const DisorderConfig& config, DisorderRunInfo* info = nullptr);

/// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace superrad
