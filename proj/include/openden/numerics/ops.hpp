#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "openden/numerics/matrix.hpp"

namespace openden::numerics {

// One byte per entry, non-zero = trainable. Same layout as the matrix it masks.
using EntryMask = std::vector<std::uint8_t>;

// out[i] = sum_j W[i,j] x[j] + b[i]
std::vector<double> linear_forward(const Matrix& weights, std::span<const double> bias,
                                   std::span<const double> x);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> dlogits;
};

// Max-subtracted softmax followed by the negative log-likelihood of `label`.
CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t label);

// Same as softmax_cross_entropy but writes the gradient into `dlogits` (sized
// like `logits`) and returns only the loss. Used by the batched backward pass.
double softmax_cross_entropy_into(std::span<const double> logits, std::size_t label,
                                  std::span<double> dlogits);

inline double soft_threshold(double w, double shrink) noexcept {
  if (w > shrink) return w - shrink;
  if (w < -shrink) return w + shrink;
  return 0.0;
}

// Proximal step for shrink*|w| on the trainable entries: w <- sign(w) max(|w| - shrink, 0).
// An empty mask means every entry is trainable. Untrainable entries keep
// their exact bit pattern.
Matrix l1_proximal(const Matrix& weights, double shrink, std::span<const std::uint8_t> mask = {});
void l1_proximal_inplace(std::span<double> weights, double shrink,
                         std::span<const std::uint8_t> mask = {});

// Proximal step for shrink*|w - anchor|: pulls each trainable entry toward its
// anchor by at most `shrink`.
void drift_proximal_inplace(std::span<double> weights, std::span<const double> anchor,
                            double shrink, std::span<const std::uint8_t> mask = {});

}  // namespace openden::numerics
