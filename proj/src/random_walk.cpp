#include "carpet/random_walk.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace carpet {

void WalkConfig::validate() const {
  if (trials < 1) throw ConfigError("walk: trials must be >= 1");
  if (max_length < 1) throw ConfigError("walk: max_length must be >= 1");
}

std::vector<std::uint64_t> WalkStats::return_lengths() const {
  std::vector<std::uint64_t> out;
  for (const auto& t : trials) {
    if (t.recurrent) out.push_back(t.length);
  }
  return out;
}

std::map<double, std::uint64_t> WalkStats::log_histogram() const {
  std::map<double, std::uint64_t> h;
  for (auto len : return_lengths()) {
    const double bin = std::floor(10.0 * std::log10(static_cast<double>(len)) + 1e-9) / 10.0;
    ++h[bin];
  }
  return h;
}

TrialResult run_trial(const WalkConfig& config, const BlowupOracle& oracle, std::uint64_t trial_index) {
  std::mt19937_64 rng(trial_seed(config.master_seed, trial_index));
  ExtAddr pos = config.start;
  std::uint64_t bits = 0;
  int bits_left = 0;
  for (std::uint64_t n = 1; n <= config.max_length; ++n) {
    if (bits_left == 0) {
      bits = rng();
      bits_left = 32;
    }
    const auto dir = static_cast<Direction>(bits & 3u);
    bits >>= 2;
    --bits_left;
    auto next = oracle.neighbor(pos, dir);
    if (!next) throw NumericError("random walk left the supported coordinate range");
    pos = *next;
    if (pos == config.start) return {true, n};
  }
  return {false, config.max_length};
}

TrialResult run_trial(const WalkConfig& config, std::uint64_t trial_index) {
  config.validate();
  BlowupOracle oracle({config.ident}, config.embedding);
  return run_trial(config, oracle, trial_index);
}

WalkStats run_batch(const WalkConfig& config, unsigned threads) {
  config.validate();
  const BlowupOracle oracle({config.ident}, config.embedding);
  if (!oracle.exists(config.start)) throw ConfigError("walk: start is not a cell");

  WalkStats stats;
  stats.trials.resize(config.trials);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t k = next++; k < config.trials; k = next++) stats.trials[k] = run_trial(config, oracle, k);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& t : stats.trials) {
    if (t.recurrent) {
      ++stats.recurrent_count;
      (t.length % 2 == 0 ? stats.even_returns : stats.odd_returns) += 1;
    } else {
      ++stats.transient_count;
    }
  }
  return stats;
}

}  // namespace carpet
