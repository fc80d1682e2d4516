#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace openden::numerics {

enum class OptimizerKind { sgd, adam };

const char* to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer_kind(const std::string& name);

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static double default_learning_rate(OptimizerKind kind) noexcept {
    return kind == OptimizerKind::adam ? 1e-3 : 1e-2;
  }
};

// A named view of one parameter tensor and its gradient.
struct ParamRef {
  std::string name;
  std::span<double> values;
  std::span<const double> grads;
};

// SGD or Adam with per-tensor moment buffers. The tensor list (count and
// sizes) must stay the same for the lifetime of the state; a structural edit
// to the network means a fresh optimizer.
class Optimizer {
 public:
  explicit Optimizer(OptimizerSettings settings);

  const OptimizerSettings& settings() const noexcept { return settings_; }
  std::uint64_t steps() const noexcept { return steps_; }

  // Entries whose gradient is exactly zero (and, for Adam, whose moments are
  // still zero) are left untouched bit-for-bit, which is how frozen entries
  // stay frozen.
  void step(std::span<const ParamRef> params);

  const std::vector<std::vector<double>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moments() const noexcept { return v_; }

 private:
  OptimizerSettings settings_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace openden::numerics
