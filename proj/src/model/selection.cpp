#include "openden/model/selection.hpp"

#include <string>

#include "openden/error.hpp"

namespace openden::model {

WeightSnapshot WeightSnapshot::capture(const DenNetwork& net,
                                       const std::vector<std::vector<NeuronId>>* rows_per_layer) {
  if (rows_per_layer && rows_per_layer->size() != net.layer_count()) {
    throw ShapeError("snapshot: expected one row list per layer");
  }
  WeightSnapshot snap;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    Block block;
    if (l == 0) {
      for (std::size_t c = 0; c < layer.fan_in(); ++c) block.cols.push_back(c);
    } else {
      block.cols = net.layer(l - 1).neuron_ids;
    }
    std::vector<std::size_t> row_index;
    if (rows_per_layer) {
      for (NeuronId id : (*rows_per_layer)[l]) {
        auto idx = layer.index_of(id);
        if (!idx) throw IndexError("snapshot: neuron " + std::to_string(id) + " not in layer");
        row_index.push_back(*idx);
      }
    } else {
      for (std::size_t r = 0; r < layer.width(); ++r) row_index.push_back(r);
    }
    block.weights = Matrix(row_index.size(), layer.fan_in());
    for (std::size_t i = 0; i < row_index.size(); ++i) {
      const std::size_t r = row_index[i];
      block.rows.push_back(layer.neuron_ids[r]);
      block.biases.push_back(layer.biases[r]);
      auto src = layer.weights.row(r);
      std::copy(src.begin(), src.end(), block.weights.row(i).begin());
    }
    if (block.rows.empty()) block.cols.clear();

    Index index;
    for (std::size_t i = 0; i < block.rows.size(); ++i) index.rows.emplace(block.rows[i], i);
    for (std::size_t j = 0; j < block.cols.size(); ++j) index.cols.emplace(block.cols[j], j);
    snap.blocks_.push_back(std::move(block));
    snap.index_.push_back(std::move(index));
  }
  return snap;
}

bool WeightSnapshot::empty() const noexcept { return entry_count() == 0; }

std::size_t WeightSnapshot::entry_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.rows.size();
  return n;
}

std::optional<double> WeightSnapshot::weight(std::size_t layer, NeuronId row, NeuronId col) const {
  if (layer >= blocks_.size()) return std::nullopt;
  const auto& idx = index_[layer];
  auto r = idx.rows.find(row);
  auto c = idx.cols.find(col);
  if (r == idx.rows.end() || c == idx.cols.end()) return std::nullopt;
  return blocks_[layer].weights(r->second, c->second);
}

std::optional<double> WeightSnapshot::bias(std::size_t layer, NeuronId row) const {
  if (layer >= blocks_.size()) return std::nullopt;
  auto r = index_[layer].rows.find(row);
  if (r == index_[layer].rows.end()) return std::nullopt;
  return blocks_[layer].biases[r->second];
}

Matrix WeightSnapshot::aligned_weights(const DenNetwork& net, std::size_t layer) const {
  const auto& live = net.layer(layer);
  Matrix out = live.weights;
  if (layer >= blocks_.size()) return out;
  const auto& idx = index_[layer];
  const auto& block = blocks_[layer];
  std::vector<std::optional<std::size_t>> col_map(live.fan_in());
  for (std::size_t c = 0; c < live.fan_in(); ++c) {
    const NeuronId key = layer == 0 ? NeuronId{c} : net.layer(layer - 1).neuron_ids[c];
    if (auto it = idx.cols.find(key); it != idx.cols.end()) col_map[c] = it->second;
  }
  for (std::size_t r = 0; r < live.width(); ++r) {
    auto it = idx.rows.find(live.neuron_ids[r]);
    if (it == idx.rows.end()) continue;
    for (std::size_t c = 0; c < live.fan_in(); ++c) {
      if (col_map[c]) out(r, c) = block.weights(it->second, *col_map[c]);
    }
  }
  return out;
}

std::vector<std::size_t> SubNetworkSelection::hidden_counts() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l + 1 < selected.size(); ++l) out.push_back(selected[l].size());
  return out;
}

bool SubNetworkSelection::degenerate() const {
  for (std::size_t l = 0; l + 1 < selected.size(); ++l) {
    if (!selected[l].empty()) return false;
  }
  return true;
}

SubNetworkSelection select_subnetwork(const DenNetwork& net, std::size_t task) {
  const std::size_t layers = net.layer_count();
  const auto& out = net.output_layer();
  std::optional<std::size_t> ot;
  for (std::size_t r = 0; r < out.width(); ++r) {
    if (out.birth_task[r] == task) ot = r;
  }
  if (task < 2 || !ot) {
    throw ProtocolError("select_subnetwork: no output node was added for task " + std::to_string(task));
  }

  // selected_rows[l][r]: neuron r of layer l is in S.
  std::vector<std::vector<std::uint8_t>> selected_rows(layers);
  for (std::size_t l = 0; l < layers; ++l) selected_rows[l].assign(net.layer(l).width(), 0);
  selected_rows[layers - 1][*ot] = 1;

  for (std::size_t l = layers - 1; l > 0; --l) {
    const auto& layer = net.layer(l);
    auto& below = selected_rows[l - 1];
    for (std::size_t r = 0; r < layer.width(); ++r) {
      if (!selected_rows[l][r]) continue;
      auto w = layer.weights.row(r);
      for (std::size_t c = 0; c < w.size(); ++c) {
        if (layer.edge(r, c) && w[c] != 0.0) below[c] = 1;
      }
    }
  }

  SubNetworkSelection sel;
  sel.task = task;
  sel.output_node = out.neuron_ids[*ot];
  sel.selected.resize(layers);
  sel.trainable = TrainableMask::none(net);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& layer = net.layer(l);
    const std::size_t cols = layer.fan_in();
    for (std::size_t r = 0; r < layer.width(); ++r) {
      if (!selected_rows[l][r]) continue;
      sel.selected[l].push_back(layer.neuron_ids[r]);
      sel.trainable.biases[l][r] = 1;
      for (std::size_t c = 0; c < cols; ++c) {
        // Inputs feed selected first-layer neurons; o_t keeps all its inbound edges.
        const bool source_selected = (l == 0) || (l + 1 == layers) || selected_rows[l - 1][c];
        if (source_selected && layer.edge(r, c)) sel.trainable.weights[l][r * cols + c] = 1;
      }
    }
  }
  sel.snapshot = WeightSnapshot::capture(net, &sel.selected);
  return sel;
}

WeightSnapshot snapshot_weights(const DenNetwork& net, const SubNetworkSelection* scope) {
  if (!scope) return WeightSnapshot::capture(net);
  if (scope->selected.empty()) return WeightSnapshot{};
  return WeightSnapshot::capture(net, &scope->selected);
}

}  // namespace openden::model
