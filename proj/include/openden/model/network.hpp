#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "openden/numerics/matrix.hpp"

namespace openden::model {

using numerics::Matrix;

// Neuron IDs are handed out in increasing order and never reused.
using NeuronId = std::uint64_t;

// One fully-connected layer. Row r of `weights` is the inbound weight vector
// of neuron r; `edge_mask` has the same layout and marks which edges exist.
struct LayerState {
  Matrix weights;
  std::vector<double> biases;
  std::vector<NeuronId> neuron_ids;
  std::vector<std::uint8_t> edge_mask;
  std::vector<std::size_t> birth_task;

  std::size_t width() const noexcept { return weights.rows(); }
  std::size_t fan_in() const noexcept { return weights.cols(); }
  bool edge(std::size_t r, std::size_t c) const noexcept {
    return edge_mask[r * weights.cols() + c] != 0;
  }
  std::optional<std::size_t> index_of(NeuronId id) const noexcept;

  // Structural edits keep weights, biases, ids, births and mask in step.
  void append_cols(std::size_t count);
  void erase_row(std::size_t r);
  void erase_col(std::size_t c);

  std::size_t permitted_edges() const noexcept;

  friend bool operator==(const LayerState&, const LayerState&) = default;
};

struct NetworkOptions {
  // New top-hidden neurons feed every output node instead of only the
  // current task's node. Breaks exact old-logit preservation; ablation only.
  bool connect_all_outputs = false;
};

struct NeuronLocation {
  std::size_t layer = 0;
  std::size_t index = 0;
};

// Growable masked fully-connected head over a fixed-length feature input.
// layers()[0 .. L-2] are hidden (ReLU), layers().back() is the linear output.
class DenNetwork {
 public:
  DenNetwork(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
             std::uint64_t seed, NetworkOptions options = {});

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::size_t hidden_layer_count() const noexcept { return layers_.size() - 1; }
  std::size_t num_categories() const noexcept { return layers_.back().width(); }
  std::size_t generation() const noexcept { return generation_; }
  const NetworkOptions& options() const noexcept { return options_; }
  NeuronId next_neuron_id() const noexcept { return next_id_; }

  std::span<const LayerState> layers() const noexcept { return layers_; }
  LayerState& layer(std::size_t i) { return layers_.at(i); }
  const LayerState& layer(std::size_t i) const { return layers_.at(i); }
  const LayerState& output_layer() const noexcept { return layers_.back(); }

  std::vector<std::size_t> hidden_widths() const;
  std::size_t hidden_neuron_count() const;
  // Permitted weights plus biases.
  std::size_t parameter_count() const;

  std::optional<NeuronLocation> locate(NeuronId id) const noexcept;

  std::vector<double> forward(std::span<const double> x) const;

  // Moves a fresh network to generation 1 (the two-category task).
  void begin_initial_task();

  // Starts task t = generation + 1 by adding its output node o_t.
  NeuronId add_output_node();

  // Adds k neurons to every hidden layer for the current task. New neurons
  // take input from every neuron below; their outputs go only to new neurons
  // above and, at the top, only to o_t.
  std::vector<std::vector<NeuronId>> add_hidden_nodes(std::size_t k);

  // Zeroes every weight with |w| < threshold; returns how many non-zero
  // weights were cleared.
  std::size_t sparsify(double zero_threshold);

  // Removes each candidate whose permitted outbound weights all satisfy
  // |w| < epsilon. Candidates must be hidden neurons born in the current task.
  std::vector<NeuronId> remove_neurons(double epsilon, std::span<const NeuronId> candidates);

  // Throws if any structurally absent edge holds a non-zero value.
  void check_structural_zeros() const;

  // Bit-exact comparison of structure, parameters and counters.
  bool identical_to(const DenNetwork& other) const;

  // Checkpoint support; see checkpoint.hpp.
  struct RawState {
    std::size_t input_dim = 0;
    std::size_t generation = 0;
    NeuronId next_id = 0;
    NetworkOptions options;
    std::vector<LayerState> layers;
    std::mt19937_64 rng;
  };
  RawState raw_state() const;
  static DenNetwork from_raw_state(RawState state);

 private:
  DenNetwork() = default;
  void init_rows(LayerState& layer, std::size_t first_row, double fan_out);
  double draw_uniform(double limit);

  std::size_t input_dim_ = 0;
  std::size_t generation_ = 0;
  NeuronId next_id_ = 0;
  NetworkOptions options_;
  std::vector<LayerState> layers_;
  std::mt19937_64 rng_;
};

struct ExpansionReport {
  std::vector<std::size_t> added;    // per hidden layer
  std::vector<std::size_t> removed;  // per hidden layer
  double accuracy_after = 0.0;
  double seconds = 0.0;
};

// True when every parameter of `before` (matched by neuron ID and input
// column) has the same bit pattern in `after`, and no neuron of `before` is missing.
bool preserves_parameters(const DenNetwork& before, const DenNetwork& after);

}  // namespace openden::model
