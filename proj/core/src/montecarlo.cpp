#include "superrad/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <list>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "superrad/correlations.hpp"
#include "superrad/serialization.hpp"

namespace superrad {

namespace {

struct PairKey {
  std::uint64_t emitters;  // mu << 32 | nu
  std::uint64_t offsets;   // packed grid indices of both emitters

  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const {
    return static_cast<std::size_t>(splitmix64(k.emitters ^ splitmix64(k.offsets)));
  }
};

// Pair-rate memo shared by all workers. Values are pure functions of the
// key, so hits and misses give identical results; eviction is LRU per shard.
class PairRateCache {
 public:
  explicit PairRateCache(std::size_t capacity) : per_shard_(std::max<std::size_t>(capacity / kShards, 1)) {}

  template <class Compute>
  PairRate get(const PairKey& key, Compute&& compute) {
    auto& shard = shards_[PairKeyHash{}(key) % kShards];
    {
      std::lock_guard lock(shard.mutex);
      if (auto it = shard.index.find(key); it != shard.index.end()) {
        shard.order.splice(shard.order.begin(), shard.order, it->second);
        hits_.fetch_add(1, std::memory_order_relaxed);
        return it->second->second;
      }
    }
    const PairRate value = compute();
    misses_.fetch_add(1, std::memory_order_relaxed);
    std::lock_guard lock(shard.mutex);
    if (shard.index.find(key) == shard.index.end()) {
      shard.order.emplace_front(key, value);
      shard.index.emplace(key, shard.order.begin());
      if (shard.index.size() > per_shard_) {
        shard.index.erase(shard.order.back().first);
        shard.order.pop_back();
      }
    }
    return value;
  }

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  static constexpr std::size_t kShards = 16;
  struct Shard {
    std::mutex mutex;
    std::list<std::pair<PairKey, PairRate>> order;
    std::unordered_map<PairKey, std::list<std::pair<PairKey, PairRate>>::iterator, PairKeyHash> index;
  };
  std::size_t per_shard_;
  Shard shards_[kShards];
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

// Free-space decay matrix of a jittered lattice, pair rates memoised on the
// (emitter pair, discretised offsets) key.
template <class OffsetWord>
DecayMatrix memoised_free_space(const EmitterArray& perturbed, PairRateCache& cache,
                                OffsetWord&& offset_word) {
  const auto n = static_cast<Eigen::Index>(perturbed.size());
  Eigen::MatrixXd g(n, n);
  const auto pos = perturbed.positions_nm();
  const auto dip = perturbed.dipoles();
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    const auto ui = static_cast<std::size_t>(i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const PairKey key{static_cast<std::uint64_t>(ui) << 32 | uj,
                        offset_word(ui) << 32 | offset_word(uj)};
      const auto pr = cache.get(key, [&] {
        return free_space_pair_rate(pos[ui], dip[ui], pos[uj], dip[uj], perturbed.lambda0_nm());
      });
      g(i, j) = g(j, i) = pr.gamma;
    }
  }
  return DecayMatrix(std::move(g));
}

class SampleEvaluator {
 public:
  explicit SampleEvaluator(const DisorderConfig& config)
      : config_(config),
        base_(build_square_lattice(config.lattice, config.lambda0_nm)),
        cache_(config.cache_capacity) {
    if (std::holds_alternative<FreeSpace>(config.environment) &&
        std::holds_alternative<FillingMode>(config.mode))
      full_ = build_matrices(base_, config.environment).decay;
    if (const auto* tab = std::get_if<Tabulated>(&config.environment)) {
      require_physical(tab->decay);
      full_ = tab->decay;
    }
  }

  double operator()(std::size_t index) {
    RandomStream rng = RandomStream::derive(config_.master_seed, index);
    return g2_spectral(sample_matrix(rng)).value;
  }

  const PairRateCache& cache() const { return cache_; }

 private:
  DecayMatrix sample_matrix(RandomStream& rng) {
    const auto& env = config_.environment;
    if (const auto* f = std::get_if<FillingMode>(&config_.mode)) {
      const auto keep = draw_filling_subset(base_.size(), f->eta, rng);
      if (full_) return full_->subsample(keep);
      return build_matrices(keep.size(), env).decay;
    }
    if (const auto* p = std::get_if<PositionMode>(&config_.mode)) {
      const JitterGrid grid{p->delta_r_nm, p->steps};
      const auto offsets = draw_position_offsets(base_.size(), grid, rng);
      const EmitterArray moved = shift_positions(base_, grid, offsets);
      if (!std::holds_alternative<FreeSpace>(env)) return build_matrices(moved, env).decay;
      return memoised_free_space(moved, cache_, [&](std::size_t i) {
        return static_cast<std::uint64_t>(offsets[i][0]) << 16 | static_cast<std::uint64_t>(offsets[i][1]);
      });
    }
    const auto& o = std::get<OrientationMode>(config_.mode);
    const JitterGrid grid{o.delta_theta_deg, o.steps};
    const auto offsets = draw_orientation_offsets(base_.size(), grid, rng);
    const EmitterArray turned = rotate_dipoles(base_, grid, offsets);
    if (!std::holds_alternative<FreeSpace>(env)) return build_matrices(turned, env).decay;
    return memoised_free_space(turned, cache_,
                               [&](std::size_t i) { return static_cast<std::uint64_t>(offsets[i]); });
  }

  const DisorderConfig& config_;
  EmitterArray base_;
  std::optional<DecayMatrix> full_;
  PairRateCache cache_;
};

}  // namespace

std::string mode_name(const DisorderMode& mode) {
  static constexpr const char* names[] = {"filling", "position", "orientation"};
  return names[mode.index()];
}

std::size_t default_sample_count(const DisorderMode& mode) {
  return std::holds_alternative<FillingMode>(mode) ? 10000 : 1000;
}

void check_config(const DisorderConfig& config) {
  if (config.n_samples == 0) throw std::invalid_argument("disorder: n_samples must be >= 1");
  check_environment(config.environment);
  const std::size_t n_sites = static_cast<std::size_t>(config.lattice.n_side) *
                              static_cast<std::size_t>(std::max(config.lattice.n_side, 0));
  if (config.lattice.n_side < 1) throw std::invalid_argument("disorder: n_side must be >= 1");
  if (const auto* tab = std::get_if<Tabulated>(&config.environment)) {
    if (!std::holds_alternative<FillingMode>(config.mode))
      throw std::invalid_argument(
          "disorder: tabulated environments support only filling-fraction disorder");
    if (tab->decay.size() != n_sites)
      throw std::invalid_argument("disorder: tabulated matrix dimension does not match n_side^2");
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FillingMode>) {
          if (!(m.eta >= 0.0 && m.eta <= 1.0)) throw std::invalid_argument("disorder: eta must be in [0,1]");
          if (filled_count(n_sites, m.eta) < 2)
            throw std::invalid_argument("disorder: filling fraction leaves fewer than two emitters");
        } else if constexpr (std::is_same_v<T, PositionMode>) {
          if (!(m.delta_r_nm >= 0.0)) throw std::invalid_argument("disorder: delta_r must be >= 0");
          if (m.steps < 1 || m.steps > 65534) throw std::invalid_argument("disorder: steps out of range");
        } else {
          if (!(m.delta_theta_deg >= 0.0 && m.delta_theta_deg <= 180.0))
            throw std::invalid_argument("disorder: delta_theta must be in [0,180] degrees");
          if (m.steps < 1 || m.steps > 65534) throw std::invalid_argument("disorder: steps out of range");
        }
      },
      config.mode);
  if (n_sites < 2) throw std::invalid_argument("disorder: lattice needs at least two emitters");
}

SummaryStats summary_stats(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("summary_stats: need at least two samples");
  // Shifted by the first sample so a constant sample has exactly zero spread.
  const double shift = samples[0];
  double sum = 0.0;
  for (double x : samples) sum += x - shift;
  const double mean = shift + sum / static_cast<double>(n);
  double m2 = 0.0;
  double m3 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double std = std::sqrt(m2 / static_cast<double>(n - 1));
  if (std == 0.0) return {mean, 0.0, std::nan(""), false};
  return {mean, std, m3 / (static_cast<double>(n - 1) * std * std * std), true};
}

ErrorBars skew_adjusted_errorbars(double /*mean*/, double std, double skewness) {
  if (!(std >= 0.0)) throw std::invalid_argument("errorbars: std must be >= 0");
  if (std::isnan(skewness)) return {std, std, false};
  return {std * (1.0 - 0.5 * skewness), std * (1.0 + 0.5 * skewness), std::abs(skewness) >= 2.0};
}

Histogram histogram(std::span<const double> samples, std::size_t n_bins,
                    std::optional<std::pair<double, double>> range) {
  if (samples.empty()) throw std::invalid_argument("histogram: no samples");
  if (n_bins == 0) throw std::invalid_argument("histogram: n_bins must be >= 1");
  double lo = 0.0;
  double hi = 0.0;
  if (range) {
    std::tie(lo, hi) = *range;
    if (!(hi > lo)) throw std::invalid_argument("histogram: range must be increasing");
  } else {
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    lo = *mn;
    hi = *mx;
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  Histogram h;
  h.edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
  h.edges.back() = hi;
  h.counts.assign(n_bins, 0);
  for (double x : samples) {
    if (x < lo || x > hi) continue;
    auto bin = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(n_bins));
    h.counts[std::min(bin, n_bins - 1)] += 1;
  }
  return h;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

DisorderDistribution run_disorder(const DisorderConfig& config, DisorderRunInfo* info) {
  check_config(config);
  SampleEvaluator evaluator(config);

  DisorderDistribution dist;
  dist.samples.assign(config.n_samples, 0.0);
  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, config.n_samples);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < config.n_samples; i = next++) dist.samples[i] = evaluator(i);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = config.n_samples;
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  if (dist.samples.size() >= 2) {
    dist.stats = summary_stats(dist.samples);
  } else {
    dist.stats = {dist.samples.front(), 0.0, std::nan(""), false};
  }
  dist.config_hash = fnv1a_hex(config_to_json(config).dump());
  if (info) {
    info->cache_hits = evaluator.cache().hits();
    info->cache_misses = evaluator.cache().misses();
  }
  return dist;
}

}  // namespace superrad
