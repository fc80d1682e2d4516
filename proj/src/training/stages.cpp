#include "openden/training/stages.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "openden/error.hpp"
#include "openden/numerics/ops.hpp"
#include "openden/numerics/optimizer.hpp"

namespace openden::training {
namespace {

bool same_bits(double a, double b) noexcept { return std::memcmp(&a, &b, sizeof a) == 0; }

void check_data(const DenNetwork& net, const LabeledSet& data, const char* stage) {
  if (data.size() == 0) throw DataError(std::string(stage) + ": no training rows");
  if (data.features.rows() != data.size()) throw ShapeError(std::string(stage) + ": label count mismatch");
  if (data.features.cols() != net.input_dim()) {
    throw ShapeError(std::string(stage) + ": feature length " + std::to_string(data.features.cols()) +
                     " does not match the network input " + std::to_string(net.input_dim()));
  }
  for (std::size_t y : data.labels) {
    if (y >= net.num_categories()) {
      throw IndexError(std::string(stage) + ": label " + std::to_string(y) + " has no output node");
    }
  }
}

}  // namespace

std::size_t sparsify_masked(DenNetwork& net, const TrainableMask& mask, double threshold) {
  std::size_t zeroed = 0;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto w = net.layer(l).weights.values();
    const auto& m = mask.weights[l];
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m[i] && w[i] != 0.0 && std::abs(w[i]) < threshold) {
        w[i] = 0.0;
        ++zeroed;
      }
    }
  }
  return zeroed;
}

bool frozen_entries_identical(const DenNetwork& before, const DenNetwork& after,
                              const TrainableMask& mask) {
  if (before.layer_count() != after.layer_count()) return false;
  for (std::size_t l = 0; l < before.layer_count(); ++l) {
    const auto& a = before.layer(l);
    const auto& b = after.layer(l);
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols()) return false;
    auto wa = a.weights.values();
    auto wb = b.weights.values();
    for (std::size_t i = 0; i < wa.size(); ++i) {
      if (!mask.weights[l][i] && !same_bits(wa[i], wb[i])) return false;
    }
    for (std::size_t i = 0; i < a.biases.size(); ++i) {
      if (!mask.biases[l][i] && !same_bits(a.biases[i], b.biases[i])) return false;
    }
  }
  return true;
}

StageStats train_stage(DenNetwork& net, const LabeledSet& data, const TrainableMask& mask,
                       const Regularizer& reg, const HyperParams& hp, std::mt19937_64& rng) {
  check_data(net, data, "train_stage");
  StageStats stats;
  const auto lowest = mask.lowest_layer();
  if (!lowest) {
    stats.skipped = true;
    return stats;
  }
  const bool drift = reg.lambda > 0.0;
  if (drift && reg.anchors.size() != net.layer_count()) {
    throw ShapeError("train_stage: drift anchors do not cover every layer");
  }
  std::optional<DenNetwork> before;
  if (hp.verify_freeze) before = net;

  numerics::Optimizer opt(hp.optimizer);
  const double lr = hp.optimizer.learning_rate;
  const std::size_t n = data.size();
  const std::size_t batch = std::min(hp.batch_size, n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Matrix xb;
  std::vector<std::size_t> yb;

  for (std::size_t epoch = 0; epoch < hp.epochs_per_stage; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      if (xb.rows() != len) xb = Matrix(len, data.features.cols());
      yb.resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        auto src = data.features.row(perm[start + i]);
        std::copy(src.begin(), src.end(), xb.row(i).begin());
        yb[i] = data.labels[perm[start + i]];
      }
      auto grads = model::cross_entropy_gradients(net, xb, yb, mask);
      if (!std::isfinite(grads.loss)) {
        throw NumericalError("train_stage: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      loss_sum += grads.loss * static_cast<double>(len);

      std::vector<numerics::ParamRef> params;
      for (std::size_t l = *lowest; l < net.layer_count(); ++l) {
        auto& layer = net.layer(l);
        params.push_back({"W" + std::to_string(l + 1), layer.weights.values(), grads.weight_grads[l].values()});
        params.push_back({"b" + std::to_string(l + 1), layer.biases, grads.bias_grads[l]});
      }
      opt.step(params);
      ++stats.steps;

      for (std::size_t l = *lowest; l < net.layer_count(); ++l) {
        auto w = net.layer(l).weights.values();
        if (reg.mu > 0.0) numerics::l1_proximal_inplace(w, lr * reg.mu, mask.weights[l]);
        if (drift) numerics::drift_proximal_inplace(w, reg.anchors[l].values(), lr * reg.lambda, mask.weights[l]);
      }
    }
    stats.final_loss = loss_sum / static_cast<double>(n);
    ++stats.epochs;
    if (hp.verify_freeze) net.check_structural_zeros();
  }

  stats.sparsified = sparsify_masked(net, mask, hp.zero_threshold);
  if (before && !frozen_entries_identical(*before, net, mask)) {
    throw ProtocolError("train_stage: a frozen parameter changed during training");
  }
  return stats;
}

StageStats train_initial(DenNetwork& net, const LabeledSet& d1, const HyperParams& hp,
                         std::mt19937_64& rng) {
  if (net.generation() != 0) throw ProtocolError("train_initial: the network has already been trained");
  std::vector<bool> seen(2, false);
  for (std::size_t y : d1.labels) {
    if (y >= 2) throw ProtocolError("train_initial: the initial task must contain exactly 2 categories");
    seen[y] = true;
  }
  if (!seen[0] || !seen[1]) {
    throw ProtocolError("train_initial: the initial task must contain exactly 2 categories");
  }
  net.begin_initial_task();
  return train_stage(net, d1, TrainableMask::all(net), {hp.mu, 0.0, {}}, hp, rng);
}

StageStats train_output_layer(DenNetwork& net, const LabeledSet& data, const HyperParams& hp,
                              std::mt19937_64& rng) {
  const std::size_t out = net.layer_count() - 1;
  return train_stage(net, data, TrainableMask::whole_layer(net, out), {hp.mu, 0.0, {}}, hp, rng);
}

StageStats train_subnetwork(DenNetwork& net, const model::SubNetworkSelection& selection,
                            const LabeledSet& data, const HyperParams& hp, std::mt19937_64& rng) {
  if (selection.degenerate()) {
    StageStats s;
    s.skipped = true;
    return s;
  }
  Regularizer reg{hp.mu, hp.lambda_drift, {}};
  if (reg.lambda > 0.0) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      reg.anchors.push_back(selection.snapshot.aligned_weights(net, l));
    }
  }
  return train_stage(net, data, selection.trainable, reg, hp, rng);
}

TrainableMask expansion_mask(const DenNetwork& net, const std::vector<std::vector<model::NeuronId>>& added) {
  TrainableMask mask = TrainableMask::none(net);
  const std::size_t hidden = net.hidden_layer_count();
  if (added.size() != hidden) throw ShapeError("expansion_mask: one ID list per hidden layer expected");
  std::vector<std::vector<std::uint8_t>> is_new(hidden);
  for (std::size_t l = 0; l < hidden; ++l) {
    const auto& layer = net.layer(l);
    is_new[l].assign(layer.width(), 0);
    for (auto id : added[l]) {
      const auto r = layer.index_of(id);
      if (!r) throw IndexError("expansion_mask: neuron " + std::to_string(id) + " not in layer");
      is_new[l][*r] = 1;
      for (std::size_t c = 0; c < layer.fan_in(); ++c) {
        mask.weights[l][*r * layer.fan_in() + c] = layer.edge(*r, c) ? 1 : 0;
      }
      mask.biases[l][*r] = 1;
    }
  }
  const std::size_t out = net.layer_count() - 1;
  const auto& top = net.layer(out);
  for (std::size_t r = 0; r < top.width(); ++r) {
    for (std::size_t c = 0; c < top.fan_in(); ++c) {
      if (is_new[hidden - 1][c] && top.edge(r, c)) mask.weights[out][r * top.fan_in() + c] = 1;
    }
  }
  return mask;
}

ExpansionOutcome dynamic_expansion(DenNetwork& net, const LabeledSet& data, const HyperParams& hp,
                                   std::mt19937_64& rng) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpansionOutcome out;
  const auto added = net.add_hidden_nodes(hp.k);
  const TrainableMask mask = expansion_mask(net, added);
  out.stats = train_stage(net, data, mask, {hp.mu, 0.0, {}}, hp, rng);

  std::vector<model::NeuronId> candidates;
  for (const auto& ids : added) candidates.insert(candidates.end(), ids.begin(), ids.end());
  const auto removed = net.remove_neurons(hp.epsilon_prune, candidates);

  for (const auto& ids : added) {
    out.report.added.push_back(ids.size());
    std::size_t gone = 0;
    for (auto id : ids) gone += std::binary_search(removed.begin(), removed.end(), id) ? 1 : 0;
    out.report.removed.push_back(gone);
  }
  out.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace openden::training
