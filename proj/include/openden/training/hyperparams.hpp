#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "openden/numerics/optimizer.hpp"

namespace openden::training {

struct HyperParams {
  double mu = 1e-4;             // L1 coefficient
  double lambda_drift = 1e-2;   // pull toward the previous task's weights
  std::size_t rho = 10;         // minimum rehearsal draws per old category
  double tau = 0.85;            // expansion gate on A_t
  std::size_t k = 32;           // neurons added per hidden layer
  double epsilon_prune = 1e-3;
  double zero_threshold = 1e-4;
  std::size_t epochs_per_stage = 20;
  std::size_t batch_size = 32;
  numerics::OptimizerSettings optimizer;
  // Empty means derived from the input length; see resolved_hidden_sizes.
  std::vector<std::size_t> hidden_sizes;
  std::uint64_t seed = 0;
  bool connect_all_outputs = false;
  // Check every stage's frozen set bit-for-bit and the structural zeros each epoch.
  bool verify_freeze = true;
  // When false the seconds column is logged as 0 so logs are byte-reproducible.
  bool log_wall_time = false;

  // hidden_sizes when set, otherwise (w, w/2) with w = max(8, round(input_dim / 5)):
  // 1280 -> (256, 128), 32 -> (8, 4).
  std::vector<std::size_t> resolved_hidden_sizes(std::size_t input_dim) const;

  // Throws ConfigError naming the first offending field.
  void validate() const;
  // Stable one-line key=value rendering of every field.
  std::string canonical() const;
  // 16 hex digits of FNV-1a over canonical().
  std::string fingerprint() const;
};

enum class SeedPurpose : std::uint64_t { order = 1, sampler = 2, model = 3, shuffle = 4 };

// Counter-based split: the seed of (trial, purpose) depends only on those
// and the master seed, so adding trials leaves earlier ones untouched.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, SeedPurpose purpose) noexcept;

struct TrialSeeds {
  std::uint64_t order = 0;
  std::uint64_t sampler = 0;
  std::uint64_t model = 0;
  std::uint64_t shuffle = 0;

  static TrialSeeds derive(std::uint64_t master, std::uint64_t trial) noexcept;
};

// Random permutation of 0..count-1.
std::vector<std::size_t> category_order(std::size_t count, std::uint64_t seed);

}  // namespace openden::training
