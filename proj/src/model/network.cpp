#include "openden/model/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_set>

#include "openden/error.hpp"
#include "openden/numerics/ops.hpp"

namespace openden::model {

std::optional<std::size_t> LayerState::index_of(NeuronId id) const noexcept {
  auto it = std::find(neuron_ids.begin(), neuron_ids.end(), id);
  if (it == neuron_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - neuron_ids.begin());
}

void LayerState::append_cols(std::size_t count) {
  if (count == 0) return;
  const std::size_t rows = weights.rows();
  const std::size_t old_cols = weights.cols();
  const std::size_t new_cols = old_cols + count;
  std::vector<std::uint8_t> next(rows * new_cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(edge_mask.begin() + static_cast<std::ptrdiff_t>(r * old_cols), old_cols,
                next.begin() + static_cast<std::ptrdiff_t>(r * new_cols));
  }
  edge_mask = std::move(next);
  weights.append_cols(count, 0.0);
}

void LayerState::erase_row(std::size_t r) {
  const std::size_t cols = weights.cols();
  weights.erase_row(r);
  auto first = edge_mask.begin() + static_cast<std::ptrdiff_t>(r * cols);
  edge_mask.erase(first, first + static_cast<std::ptrdiff_t>(cols));
  biases.erase(biases.begin() + static_cast<std::ptrdiff_t>(r));
  neuron_ids.erase(neuron_ids.begin() + static_cast<std::ptrdiff_t>(r));
  birth_task.erase(birth_task.begin() + static_cast<std::ptrdiff_t>(r));
}

void LayerState::erase_col(std::size_t c) {
  const std::size_t cols = weights.cols();
  std::size_t out = 0;
  for (std::size_t i = 0; i < edge_mask.size(); ++i) {
    if (i % cols != c) edge_mask[out++] = edge_mask[i];
  }
  edge_mask.resize(out);
  weights.erase_col(c);
}

std::size_t LayerState::permitted_edges() const noexcept {
  return static_cast<std::size_t>(std::count(edge_mask.begin(), edge_mask.end(), std::uint8_t{1}));
}

DenNetwork::DenNetwork(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                       std::uint64_t seed, NetworkOptions options)
    : input_dim_(input_dim), options_(options), rng_(seed) {
  if (input_dim == 0) throw ConfigError("init_network: input_dim must be >= 1");
  if (hidden_sizes.empty()) throw ConfigError("init_network: hidden_sizes must be non-empty");
  for (std::size_t w : hidden_sizes) {
    if (w == 0) throw ConfigError("init_network: hidden layer widths must be >= 1");
  }

  std::vector<std::size_t> widths(hidden_sizes.begin(), hidden_sizes.end());
  widths.push_back(2);
  std::size_t fan_in = input_dim;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    LayerState layer;
    layer.weights = Matrix(widths[l], fan_in);
    layer.biases.assign(widths[l], 0.0);
    layer.edge_mask.assign(widths[l] * fan_in, 1);
    layer.birth_task.assign(widths[l], 1);
    for (std::size_t i = 0; i < widths[l]; ++i) layer.neuron_ids.push_back(next_id_++);
    layers_.push_back(std::move(layer));
    fan_in = widths[l];
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    init_rows(layers_[l], 0, static_cast<double>(layers_[l].width()));
  }
}

double DenNetwork::draw_uniform(double limit) {
  // 53 random mantissa bits, so the draw is identical across standard libraries.
  const double unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return (2.0 * unit - 1.0) * limit;
}

void DenNetwork::init_rows(LayerState& layer, std::size_t first_row, double fan_out) {
  const std::size_t cols = layer.fan_in();
  const double limit = std::sqrt(6.0 / (static_cast<double>(cols) + fan_out));
  for (std::size_t r = first_row; r < layer.width(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      layer.weights(r, c) = layer.edge(r, c) ? draw_uniform(limit) : 0.0;
    }
  }
}

std::vector<std::size_t> DenNetwork::hidden_widths() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) out.push_back(layers_[l].width());
  return out;
}

std::size_t DenNetwork::hidden_neuron_count() const {
  std::size_t total = 0;
  for (std::size_t w : hidden_widths()) total += w;
  return total;
}

std::size_t DenNetwork::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += layer.permitted_edges() + layer.biases.size();
  return total;
}

std::optional<NeuronLocation> DenNetwork::locate(NeuronId id) const noexcept {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (auto idx = layers_[l].index_of(id)) return NeuronLocation{l, *idx};
  }
  return std::nullopt;
}

std::vector<double> DenNetwork::forward(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw ShapeError("forward: expected feature length " + std::to_string(input_dim_) + ", got " +
                     std::to_string(x.size()));
  }
  std::vector<double> act(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    act = numerics::linear_forward(layers_[l].weights, layers_[l].biases, act);
    if (l + 1 < layers_.size()) {
      for (double& v : act) v = std::max(v, 0.0);
    }
  }
  return act;
}

void DenNetwork::begin_initial_task() {
  if (generation_ != 0) throw ProtocolError("initial task can only be trained on a fresh network");
  generation_ = 1;
}

NeuronId DenNetwork::add_output_node() {
  if (generation_ == 0) {
    throw ProtocolError("add_output_node: task 1 uses the initial two outputs; no node to add");
  }
  ++generation_;
  LayerState& out = layers_.back();
  const std::size_t cols = out.fan_in();
  out.weights.append_rows(1, 0.0);
  out.edge_mask.insert(out.edge_mask.end(), cols, 1);
  out.biases.push_back(0.0);
  const NeuronId id = next_id_++;
  out.neuron_ids.push_back(id);
  out.birth_task.push_back(generation_);
  init_rows(out, out.width() - 1, static_cast<double>(out.width()));
  return id;
}

std::vector<std::vector<NeuronId>> DenNetwork::add_hidden_nodes(std::size_t k) {
  if (k == 0) throw ConfigError("add_hidden_nodes: k must be >= 1");
  const LayerState& out = layers_.back();
  if (generation_ < 2 || out.birth_task.back() != generation_) {
    throw ProtocolError("add_hidden_nodes: the current task has no output node yet");
  }

  const std::size_t hidden = hidden_layer_count();
  std::vector<std::vector<NeuronId>> added(hidden);
  for (std::size_t l = 0; l < hidden; ++l) {
    LayerState& layer = layers_[l];
    LayerState& above = layers_[l + 1];
    const std::size_t first_new = layer.width();
    const std::size_t cols = layer.fan_in();

    layer.weights.append_rows(k, 0.0);
    layer.edge_mask.insert(layer.edge_mask.end(), k * cols, 1);
    layer.biases.insert(layer.biases.end(), k, 0.0);
    layer.birth_task.insert(layer.birth_task.end(), k, generation_);
    for (std::size_t i = 0; i < k; ++i) {
      layer.neuron_ids.push_back(next_id_);
      added[l].push_back(next_id_++);
    }
    const bool above_is_output = (l + 1 == hidden);
    const double fan_out =
        static_cast<double>(above_is_output ? above.width() : above.width() + k);
    init_rows(layer, first_new, fan_out);

    // Existing neurons above never see the new ones. At the output layer the
    // new neurons feed o_t (the last row) unless the permissive variant is on.
    const std::size_t first_new_col = above.fan_in();
    above.append_cols(k);
    if (above_is_output) {
      const std::size_t new_cols = above.fan_in();
      const double limit = std::sqrt(6.0 / (static_cast<double>(new_cols) +
                                            static_cast<double>(above.width())));
      const std::size_t first_row = options_.connect_all_outputs ? 0 : above.width() - 1;
      for (std::size_t r = first_row; r < above.width(); ++r) {
        for (std::size_t c = first_new_col; c < new_cols; ++c) {
          above.edge_mask[r * new_cols + c] = 1;
          above.weights(r, c) = draw_uniform(limit);
        }
      }
    }
  }
  check_structural_zeros();
  return added;
}

std::size_t DenNetwork::sparsify(double zero_threshold) {
  if (zero_threshold < 0.0) throw ConfigError("sparsify: zero_threshold must be >= 0");
  std::size_t zeroed = 0;
  for (auto& layer : layers_) {
    auto w = layer.weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] != 0.0 && std::abs(w[i]) < zero_threshold) {
        w[i] = 0.0;
        ++zeroed;
      }
    }
  }
  return zeroed;
}

std::vector<NeuronId> DenNetwork::remove_neurons(double epsilon,
                                                 std::span<const NeuronId> candidates) {
  const std::size_t hidden = hidden_layer_count();
  std::vector<std::vector<NeuronId>> by_layer(hidden);
  std::unordered_set<NeuronId> seen;
  for (NeuronId id : candidates) {
    auto loc = locate(id);
    if (!loc || loc->layer >= hidden) {
      throw ProtocolError("remove_neurons: neuron " + std::to_string(id) +
                          " is not a hidden neuron of this network");
    }
    if (layers_[loc->layer].birth_task[loc->index] != generation_ || generation_ < 2) {
      throw ProtocolError("remove_neurons: neuron " + std::to_string(id) +
                          " was not added in the current task");
    }
    if (seen.insert(id).second) by_layer[loc->layer].push_back(id);
  }

  std::vector<NeuronId> removed;
  for (std::size_t l = hidden; l-- > 0;) {
    for (NeuronId id : by_layer[l]) {
      LayerState& layer = layers_[l];
      LayerState& above = layers_[l + 1];
      const std::size_t col = *layer.index_of(id);
      bool useless = true;
      for (std::size_t r = 0; r < above.width() && useless; ++r) {
        if (above.edge(r, col) && !(std::abs(above.weights(r, col)) < epsilon)) useless = false;
      }
      if (!useless) continue;
      layer.erase_row(col);
      above.erase_col(col);
      removed.push_back(id);
    }
  }
  std::sort(removed.begin(), removed.end());
  return removed;
}

void DenNetwork::check_structural_zeros() const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    auto w = layer.weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!layer.edge_mask[i] && std::bit_cast<std::uint64_t>(w[i]) != 0) {
        throw ProtocolError("structural zero violated in layer " + std::to_string(l) + " at row " +
                            std::to_string(i / layer.fan_in()) + ", col " +
                            std::to_string(i % layer.fan_in()));
      }
    }
  }
}

bool DenNetwork::identical_to(const DenNetwork& other) const {
  if (input_dim_ != other.input_dim_ || generation_ != other.generation_ ||
      next_id_ != other.next_id_ || layers_.size() != other.layers_.size() ||
      options_.connect_all_outputs != other.options_.connect_all_outputs) {
    return false;
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& b = other.layers_[l];
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols()) return false;
    if (!numerics::bit_identical(a.weights.values(), b.weights.values())) return false;
    if (!numerics::bit_identical(a.biases, b.biases)) return false;
    if (a.neuron_ids != b.neuron_ids || a.edge_mask != b.edge_mask ||
        a.birth_task != b.birth_task) {
      return false;
    }
  }
  return true;
}

DenNetwork::RawState DenNetwork::raw_state() const {
  return RawState{input_dim_, generation_, next_id_, options_, layers_, rng_};
}

DenNetwork DenNetwork::from_raw_state(RawState state) {
  if (state.layers.size() < 2) throw DataError("network state needs at least one hidden layer");
  std::size_t fan_in = state.input_dim;
  for (const auto& layer : state.layers) {
    const std::size_t rows = layer.weights.rows();
    if (layer.weights.cols() != fan_in || layer.biases.size() != rows ||
        layer.neuron_ids.size() != rows || layer.birth_task.size() != rows ||
        layer.edge_mask.size() != rows * fan_in) {
      throw DataError("network state has inconsistent layer shapes");
    }
    fan_in = rows;
  }
  DenNetwork net;
  net.input_dim_ = state.input_dim;
  net.generation_ = state.generation;
  net.next_id_ = state.next_id;
  net.options_ = state.options;
  net.layers_ = std::move(state.layers);
  net.rng_ = state.rng;
  net.check_structural_zeros();
  return net;
}

bool preserves_parameters(const DenNetwork& before, const DenNetwork& after) {
  if (before.layer_count() != after.layer_count() || before.input_dim() != after.input_dim()) {
    return false;
  }
  for (std::size_t l = 0; l < before.layer_count(); ++l) {
    const auto& a = before.layer(l);
    const auto& b = after.layer(l);
    // Column c of `a` maps to column col_map[c] of `b`.
    std::vector<std::size_t> col_map(a.fan_in());
    for (std::size_t c = 0; c < a.fan_in(); ++c) {
      if (l == 0) {
        col_map[c] = c;
        continue;
      }
      auto idx = after.layer(l - 1).index_of(before.layer(l - 1).neuron_ids[c]);
      if (!idx) return false;
      col_map[c] = *idx;
    }
    for (std::size_t r = 0; r < a.width(); ++r) {
      auto rb = b.index_of(a.neuron_ids[r]);
      if (!rb) return false;
      if (std::bit_cast<std::uint64_t>(a.biases[r]) != std::bit_cast<std::uint64_t>(b.biases[*rb])) {
        return false;
      }
      for (std::size_t c = 0; c < a.fan_in(); ++c) {
        if (std::bit_cast<std::uint64_t>(a.weights(r, c)) !=
            std::bit_cast<std::uint64_t>(b.weights(*rb, col_map[c]))) {
          return false;
        }
        if (a.edge(r, c) != b.edge(*rb, col_map[c])) return false;
      }
    }
  }
  return true;
}

}  // namespace openden::model
