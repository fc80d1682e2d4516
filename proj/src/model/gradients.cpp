#include "openden/model/gradients.hpp"

#include <algorithm>
#include <string>

#include "openden/error.hpp"

namespace openden::model {

TrainableMask TrainableMask::none(const DenNetwork& net) {
  TrainableMask mask;
  for (const auto& layer : net.layers()) {
    mask.weights.emplace_back(layer.edge_mask.size(), 0);
    mask.biases.emplace_back(layer.width(), 0);
  }
  return mask;
}

TrainableMask TrainableMask::all(const DenNetwork& net) {
  TrainableMask mask;
  for (const auto& layer : net.layers()) {
    mask.weights.push_back(layer.edge_mask);
    mask.biases.emplace_back(layer.width(), 1);
  }
  return mask;
}

TrainableMask TrainableMask::whole_layer(const DenNetwork& net, std::size_t layer) {
  TrainableMask mask = none(net);
  mask.weights.at(layer) = net.layer(layer).edge_mask;
  std::fill(mask.biases[layer].begin(), mask.biases[layer].end(), 1);
  return mask;
}

std::size_t TrainableMask::weight_count() const noexcept {
  std::size_t n = 0;
  for (const auto& m : weights) n += static_cast<std::size_t>(std::count(m.begin(), m.end(), 1));
  return n;
}

std::size_t TrainableMask::bias_count() const noexcept {
  std::size_t n = 0;
  for (const auto& m : biases) n += static_cast<std::size_t>(std::count(m.begin(), m.end(), 1));
  return n;
}

std::optional<std::size_t> TrainableMask::lowest_layer() const noexcept {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const bool any_w = std::any_of(weights[l].begin(), weights[l].end(), [](auto v) { return v; });
    const bool any_b = std::any_of(biases[l].begin(), biases[l].end(), [](auto v) { return v; });
    if (any_w || any_b) return l;
  }
  return std::nullopt;
}

namespace {

void check_mask_shape(const DenNetwork& net, const TrainableMask& mask) {
  if (mask.weights.size() != net.layer_count() || mask.biases.size() != net.layer_count()) {
    throw ShapeError("trainable mask has the wrong number of layers");
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    if (mask.weights[l].size() != net.layer(l).edge_mask.size() ||
        mask.biases[l].size() != net.layer(l).width()) {
      throw ShapeError("trainable mask does not match layer " + std::to_string(l));
    }
  }
}

}  // namespace

ForwardCache forward_batch(const DenNetwork& net, const Matrix& inputs) {
  if (inputs.cols() != net.input_dim()) {
    throw ShapeError("forward_batch: expected feature length " + std::to_string(net.input_dim()) +
                     ", got " + std::to_string(inputs.cols()));
  }
  ForwardCache cache;
  cache.activations.reserve(net.layer_count() + 1);
  cache.activations.push_back(inputs);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    Matrix z = numerics::matmul_transposed(cache.activations.back(), layer.weights);
    const bool hidden = l + 1 < net.layer_count();
    for (std::size_t b = 0; b < z.rows(); ++b) {
      auto row = z.row(b);
      for (std::size_t i = 0; i < row.size(); ++i) {
        row[i] += layer.biases[i];
        if (hidden && row[i] < 0.0) row[i] = 0.0;
      }
    }
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

double cross_entropy_loss(const DenNetwork& net, const Matrix& inputs,
                          std::span<const std::size_t> labels) {
  if (labels.size() != inputs.rows()) throw ShapeError("cross_entropy_loss: label count mismatch");
  const ForwardCache cache = forward_batch(net, inputs);
  const Matrix& logits = cache.activations.back();
  std::vector<double> scratch(logits.cols());
  double total = 0.0;
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    total += numerics::softmax_cross_entropy_into(logits.row(b), labels[b], scratch);
  }
  return total / static_cast<double>(logits.rows());
}

GradientBundle cross_entropy_gradients(const DenNetwork& net, const Matrix& inputs,
                                       std::span<const std::size_t> labels,
                                       const TrainableMask& mask) {
  check_mask_shape(net, mask);
  if (labels.size() != inputs.rows()) throw ShapeError("cross_entropy_gradients: label count mismatch");
  if (inputs.rows() == 0) throw ShapeError("cross_entropy_gradients: empty batch");

  const std::size_t layers = net.layer_count();
  GradientBundle out;
  out.weight_grads.resize(layers);
  out.bias_grads.resize(layers);

  const ForwardCache cache = forward_batch(net, inputs);
  const Matrix& logits = cache.activations.back();
  const double inv_batch = 1.0 / static_cast<double>(inputs.rows());

  Matrix delta(logits.rows(), logits.cols());
  double total = 0.0;
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    total += numerics::softmax_cross_entropy_into(logits.row(b), labels[b], delta.row(b));
    for (double& d : delta.row(b)) d *= inv_batch;
  }
  out.loss = total * inv_batch;

  const auto lowest = mask.lowest_layer();
  if (!lowest) return out;

  for (std::size_t l = layers; l-- > *lowest;) {
    const auto& layer = net.layer(l);
    const Matrix& below = cache.activations[l];

    Matrix gw = numerics::transposed_matmul(delta, below);
    auto gv = gw.values();
    const auto& wmask = mask.weights[l];
    for (std::size_t i = 0; i < gv.size(); ++i) {
      if (!wmask[i]) gv[i] = 0.0;
    }
    std::vector<double> gb(layer.width(), 0.0);
    for (std::size_t b = 0; b < delta.rows(); ++b) {
      auto row = delta.row(b);
      for (std::size_t i = 0; i < row.size(); ++i) gb[i] += row[i];
    }
    for (std::size_t i = 0; i < gb.size(); ++i) {
      if (!mask.biases[l][i]) gb[i] = 0.0;
    }
    out.weight_grads[l] = std::move(gw);
    out.bias_grads[l] = std::move(gb);

    if (l == *lowest) break;
    Matrix next = numerics::matmul(delta, layer.weights);
    for (std::size_t b = 0; b < next.rows(); ++b) {
      auto d = next.row(b);
      auto a = below.row(b);
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(a[i] > 0.0)) d[i] = 0.0;
      }
    }
    delta = std::move(next);
  }
  return out;
}

std::vector<double> gather_trainable(const DenNetwork& net, const TrainableMask& mask) {
  check_mask_shape(net, mask);
  std::vector<double> out;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto w = net.layer(l).weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask.weights[l][i]) out.push_back(w[i]);
    }
    const auto& b = net.layer(l).biases;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (mask.biases[l][i]) out.push_back(b[i]);
    }
  }
  return out;
}

void scatter_trainable(DenNetwork& net, const TrainableMask& mask, std::span<const double> values) {
  check_mask_shape(net, mask);
  std::size_t pos = 0;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& layer = net.layer(l);
    auto w = layer.weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask.weights[l][i]) {
        if (pos >= values.size()) throw ShapeError("scatter_trainable: too few values");
        w[i] = values[pos++];
      }
    }
    for (std::size_t i = 0; i < layer.biases.size(); ++i) {
      if (mask.biases[l][i]) {
        if (pos >= values.size()) throw ShapeError("scatter_trainable: too few values");
        layer.biases[i] = values[pos++];
      }
    }
  }
  if (pos != values.size()) throw ShapeError("scatter_trainable: too many values");
}

std::vector<double> gather_trainable(const GradientBundle& grads, const TrainableMask& mask) {
  std::vector<double> out;
  for (std::size_t l = 0; l < mask.weights.size(); ++l) {
    const bool has = !grads.weight_grads[l].empty() || !grads.bias_grads[l].empty();
    const auto& wm = mask.weights[l];
    for (std::size_t i = 0; i < wm.size(); ++i) {
      if (wm[i]) out.push_back(has ? grads.weight_grads[l].values()[i] : 0.0);
    }
    const auto& bm = mask.biases[l];
    for (std::size_t i = 0; i < bm.size(); ++i) {
      if (bm[i]) out.push_back(has ? grads.bias_grads[l][i] : 0.0);
    }
  }
  return out;
}

}  // namespace openden::model
