#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <vector>

#include "openden/model/gradients.hpp"
#include "openden/model/network.hpp"

namespace openden::model {

// Deep copy of selected weight rows keyed by neuron ID, so it can be queried
// after the live network has been edited. Columns of the first layer are
// input feature indices; all other columns are neuron IDs of the layer below.
class WeightSnapshot {
 public:
  struct Block {
    std::vector<NeuronId> rows;
    std::vector<NeuronId> cols;
    Matrix weights;
    std::vector<double> biases;
  };

  WeightSnapshot() = default;

  // All neurons when `rows_per_layer` is empty; otherwise one ID list per layer.
  static WeightSnapshot capture(const DenNetwork& net,
                                const std::vector<std::vector<NeuronId>>* rows_per_layer = nullptr);

  bool empty() const noexcept;
  std::size_t entry_count() const noexcept;
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  std::optional<double> weight(std::size_t layer, NeuronId row, NeuronId col) const;
  std::optional<double> bias(std::size_t layer, NeuronId row) const;

  // Dense matrix shaped like the live layer where captured entries take their
  // snapshot value and everything else the current live value.
  Matrix aligned_weights(const DenNetwork& net, std::size_t layer) const;

 private:
  struct Index {
    std::unordered_map<NeuronId, std::size_t> rows;
    std::unordered_map<NeuronId, std::size_t> cols;
  };
  std::vector<Block> blocks_;
  std::vector<Index> index_;
};

// The neurons reached from o_t in the sparse graph and the edges induced on them.
struct SubNetworkSelection {
  std::size_t task = 0;
  NeuronId output_node = 0;
  // One list per layer; the last list is {o_t}.
  std::vector<std::vector<NeuronId>> selected;
  TrainableMask trainable;
  WeightSnapshot snapshot;

  std::vector<std::size_t> hidden_counts() const;
  // True when no hidden neuron was selected (S = {o_t}).
  bool degenerate() const;
};

// Selects o_t plus every hidden neuron with a non-zero path into it, using an
// exact != 0.0 test, then induces the trainable edge set: existing edges with
// both endpoints selected, all inputs into selected first-layer neurons,
// every edge into o_t, and the biases of selected neurons. Captures the selected rows as W_S^{t-1}.
SubNetworkSelection select_subnetwork(const DenNetwork& net, std::size_t task);

WeightSnapshot snapshot_weights(const DenNetwork& net, const SubNetworkSelection* scope = nullptr);

}  // namespace openden::model
