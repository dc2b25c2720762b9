#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "carpet/oracle.hpp"

namespace carpet {

struct WalkConfig {
  IdentType ident = IdentType::Torus;
  std::uint64_t trials = 1;
  std::uint64_t max_length = 2;
  std::uint64_t master_seed = 0;
  ExtAddr start{};
  std::vector<BlockPos> embedding;  // empty: alternating opposite corners

  void validate() const;
};

struct TrialResult {
  bool recurrent = false;
  std::uint64_t length = 0;  // steps walked when the trial terminated
};

struct WalkStats {
  std::uint64_t recurrent_count = 0;
  std::uint64_t transient_count = 0;
  std::vector<TrialResult> trials;  // indexed by trial
  std::uint64_t odd_returns = 0;
  std::uint64_t even_returns = 0;

  double recurrent_fraction() const {
    const auto n = recurrent_count + transient_count;
    return n == 0 ? 0.0 : static_cast<double>(recurrent_count) / static_cast<double>(n);
  }
  /// Return lengths of empirically recurrent trials, in trial order.
  std::vector<std::uint64_t> return_lengths() const;
  /// Counts of return lengths binned by floor(10 * log10(length)) / 10.
  std::map<double, std::uint64_t> log_histogram() const;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of trial k: mix64(master_seed ^ mix64(k)).
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return mix64(master_seed ^ mix64(trial_index));
}

TrialResult run_trial(const WalkConfig& config, const BlowupOracle& oracle, std::uint64_t trial_index);
TrialResult run_trial(const WalkConfig& config, std::uint64_t trial_index);

/// Runs every trial; the result does not depend on `threads`.
WalkStats run_batch(const WalkConfig& config, unsigned threads = 0);

}  // namespace carpet
