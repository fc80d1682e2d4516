#include "openden/numerics/optimizer.hpp"

#include <cmath>

#include "openden/error.hpp"

namespace openden::numerics {

const char* to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

Optimizer::Optimizer(OptimizerSettings settings) : settings_(settings) {
  if (!(settings_.learning_rate > 0.0) || !std::isfinite(settings_.learning_rate)) {
    throw ConfigError("optimizer learning rate must be positive and finite");
  }
}

void Optimizer::step(std::span<const ParamRef> params) {
  for (const auto& p : params) {
    if (p.values.size() != p.grads.size()) {
      throw ShapeError("optimizer: gradient shape differs from parameter '" + p.name + "'");
    }
    for (double g : p.grads) {
      if (!std::isfinite(g)) throw NumericalError("non-finite gradient in " + p.name);
    }
  }

  if (settings_.kind == OptimizerKind::adam) {
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i].assign(params[i].values.size(), 0.0);
        v_[i].assign(params[i].values.size(), 0.0);
      }
    }
    if (m_.size() != params.size()) throw ShapeError("optimizer: parameter count changed");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (m_[i].size() != params[i].values.size()) {
        throw ShapeError("optimizer: accumulator shape differs for '" + params[i].name + "'");
      }
    }
  }

  ++steps_;
  const double lr = settings_.learning_rate;

  if (settings_.kind == OptimizerKind::sgd) {
    for (const auto& p : params) {
      for (std::size_t j = 0; j < p.values.size(); ++j) {
        if (p.grads[j] != 0.0) p.values[j] -= lr * p.grads[j];
      }
    }
    return;
  }

  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.values.size(); ++j) {
      const double g = p.grads[j];
      if (g == 0.0 && m[j] == 0.0 && v[j] == 0.0) continue;
      m[j] = b1 * m[j] + (1.0 - b1) * g;
      v[j] = b2 * v[j] + (1.0 - b2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p.values[j] -= lr * m_hat / (std::sqrt(v_hat) + settings_.epsilon);
    }
  }
}

}  // namespace openden::numerics
