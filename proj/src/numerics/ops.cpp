#include "openden/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "openden/error.hpp"

namespace openden::numerics {

std::vector<double> linear_forward(const Matrix& weights, std::span<const double> bias,
                                   std::span<const double> x) {
  if (weights.cols() != x.size()) {
    throw ShapeError("linear_forward: weights have " + std::to_string(weights.cols()) +
                     " columns but input has length " + std::to_string(x.size()));
  }
  if (bias.size() != weights.rows()) {
    throw ShapeError("linear_forward: bias length " + std::to_string(bias.size()) +
                     " does not match " + std::to_string(weights.rows()) + " rows");
  }
  std::vector<double> out(weights.rows());
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    auto w = weights.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * x[j];
    out[i] = acc + bias[i];
  }
  return out;
}

double softmax_cross_entropy_into(std::span<const double> logits, std::size_t label,
                                  std::span<double> dlogits) {
  if (logits.size() < 2) throw ShapeError("softmax_cross_entropy: need at least two logits");
  if (label >= logits.size()) {
    throw IndexError("softmax_cross_entropy: label " + std::to_string(label) +
                     " out of range for " + std::to_string(logits.size()) + " logits");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    dlogits[i] = std::exp(logits[i] - peak);
    total += dlogits[i];
  }
  for (double& p : dlogits) p /= total;
  const double loss = std::log(total) - (logits[label] - peak);
  dlogits[label] -= 1.0;
  return loss;
}

CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
  CrossEntropy out;
  out.dlogits.resize(logits.size());
  out.loss = softmax_cross_entropy_into(logits, label, out.dlogits);
  return out;
}

namespace {

void check_mask(std::size_t n, std::span<const std::uint8_t> mask) {
  if (!mask.empty() && mask.size() != n) {
    throw ShapeError("proximal step: mask has " + std::to_string(mask.size()) +
                     " entries for " + std::to_string(n) + " weights");
  }
}

}  // namespace

void l1_proximal_inplace(std::span<double> weights, double shrink,
                         std::span<const std::uint8_t> mask) {
  check_mask(weights.size(), mask);
  if (shrink == 0.0) return;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    weights[i] = soft_threshold(weights[i], shrink);
  }
}

Matrix l1_proximal(const Matrix& weights, double shrink, std::span<const std::uint8_t> mask) {
  Matrix out = weights;
  l1_proximal_inplace(out.values(), shrink, mask);
  return out;
}

void drift_proximal_inplace(std::span<double> weights, std::span<const double> anchor,
                            double shrink, std::span<const std::uint8_t> mask) {
  check_mask(weights.size(), mask);
  if (anchor.size() != weights.size()) throw ShapeError("drift proximal: anchor size mismatch");
  if (shrink == 0.0) return;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    weights[i] = anchor[i] + soft_threshold(weights[i] - anchor[i], shrink);
  }
}

}  // namespace openden::numerics
