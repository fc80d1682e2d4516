#include "openden/training/hyperparams.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "openden/error.hpp"
#include "openden/metrics/log_io.hpp"

namespace openden::training {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("hyperparams: " + what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void HyperParams::validate() const {
  require(std::isfinite(tau) && tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
  require(finite_nonneg(mu), "mu must be >= 0");
  require(finite_nonneg(lambda_drift), "lambda_drift must be >= 0");
  require(finite_nonneg(epsilon_prune), "epsilon_prune must be >= 0");
  require(finite_nonneg(zero_threshold), "zero_threshold must be >= 0");
  require(rho >= 1, "rho must be >= 1");
  require(k >= 1, "k must be >= 1");
  require(epochs_per_stage >= 1, "epochs_per_stage must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(std::all_of(hidden_sizes.begin(), hidden_sizes.end(), [](auto w) { return w > 0; }),
          "hidden layer widths must be >= 1");
  require(std::isfinite(optimizer.learning_rate) && optimizer.learning_rate > 0.0,
          "learning_rate must be > 0");
  require(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(optimizer.epsilon > 0.0, "adam epsilon must be > 0");
}

std::string HyperParams::canonical() const {
  using metrics::format_real;
  std::ostringstream out;
  out << "mu=" << format_real(mu) << ";lambda_drift=" << format_real(lambda_drift) << ";rho=" << rho
      << ";tau=" << format_real(tau) << ";k=" << k << ";epsilon_prune=" << format_real(epsilon_prune)
      << ";zero_threshold=" << format_real(zero_threshold) << ";epochs_per_stage=" << epochs_per_stage
      << ";batch_size=" << batch_size << ";optimizer=" << numerics::to_string(optimizer.kind)
      << ";learning_rate=" << format_real(optimizer.learning_rate)
      << ";beta1=" << format_real(optimizer.beta1) << ";beta2=" << format_real(optimizer.beta2)
      << ";adam_epsilon=" << format_real(optimizer.epsilon) << ";hidden=";
  for (std::size_t i = 0; i < hidden_sizes.size(); ++i) out << (i ? "x" : "") << hidden_sizes[i];
  if (hidden_sizes.empty()) out << "auto";
  out << ";seed=" << seed << ";connect_all_outputs=" << connect_all_outputs;
  return out.str();
}

std::string HyperParams::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::size_t> HyperParams::resolved_hidden_sizes(std::size_t input_dim) const {
  if (!hidden_sizes.empty()) return hidden_sizes;
  const auto w = std::max<std::size_t>(8, static_cast<std::size_t>(std::llround(static_cast<double>(input_dim) / 5.0)));
  return {w, w / 2};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, SeedPurpose purpose) noexcept {
  const std::uint64_t a = splitmix64(master);
  const std::uint64_t b = splitmix64(a ^ splitmix64(trial + 1));
  return splitmix64(b ^ static_cast<std::uint64_t>(purpose));
}

TrialSeeds TrialSeeds::derive(std::uint64_t master, std::uint64_t trial) noexcept {
  return {derive_seed(master, trial, SeedPurpose::order), derive_seed(master, trial, SeedPurpose::sampler),
          derive_seed(master, trial, SeedPurpose::model), derive_seed(master, trial, SeedPurpose::shuffle)};
}

std::vector<std::size_t> category_order(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace openden::training
