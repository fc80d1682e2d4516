#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "openden/model/network.hpp"
#include "openden/numerics/ops.hpp"

namespace openden::model {

using numerics::EntryMask;

// Which weights and biases a training stage may touch. Weight masks share the
// layout of LayerState::weights and are always a subset of the edge mask.
struct TrainableMask {
  std::vector<EntryMask> weights;
  std::vector<EntryMask> biases;

  // Nothing trainable, shaped for `net`.
  static TrainableMask none(const DenNetwork& net);
  // Every existing edge and every bias.
  static TrainableMask all(const DenNetwork& net);
  // Every existing edge and bias of one layer.
  static TrainableMask whole_layer(const DenNetwork& net, std::size_t layer);

  std::size_t weight_count() const noexcept;
  std::size_t bias_count() const noexcept;
  // Lowest layer with any trainable entry; backprop can stop there.
  std::optional<std::size_t> lowest_layer() const noexcept;
  bool weight(std::size_t layer, std::size_t r, std::size_t c, std::size_t cols) const noexcept {
    return weights[layer][r * cols + c] != 0;
  }
};

struct GradientBundle {
  std::vector<Matrix> weight_grads;
  std::vector<std::vector<double>> bias_grads;
  double loss = 0.0;
};

struct ForwardCache {
  // activations[0] is the input batch, activations[l + 1] the output of layer
  // l (post-ReLU for hidden layers), activations.back() the logits.
  std::vector<Matrix> activations;
};

ForwardCache forward_batch(const DenNetwork& net, const Matrix& inputs);

// Mean softmax cross-entropy over the batch and its gradient. Gradients are
// zeroed outside `mask`; layers below mask.lowest_layer() are left empty.
GradientBundle cross_entropy_gradients(const DenNetwork& net, const Matrix& inputs,
                                       std::span<const std::size_t> labels,
                                       const TrainableMask& mask);

double cross_entropy_loss(const DenNetwork& net, const Matrix& inputs,
                          std::span<const std::size_t> labels);

// Flattened view of the trainable entries, in (layer, weights then biases,
// row-major) order. Used by gradient checks and snapshots.
std::vector<double> gather_trainable(const DenNetwork& net, const TrainableMask& mask);
void scatter_trainable(DenNetwork& net, const TrainableMask& mask, std::span<const double> values);
std::vector<double> gather_trainable(const GradientBundle& grads, const TrainableMask& mask);

}  // namespace openden::model
