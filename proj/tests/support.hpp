#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <cstdint>
#include <cstring>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "openden/data/dataset.hpp"
#include "openden/model/network.hpp"
#include "openden/training/hyperparams.hpp"

namespace openden::testing {

inline bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof a) == 0;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline numerics::Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                                      double lo = -1.0, double hi = 1.0) {
  numerics::Matrix m(r, c);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& x : m.values()) x = u(rng);
  return m;
}

// A network at generation `task` (one output per known category) with
// random biases, and weights zeroed independently with probability 1 - density.
inline model::DenNetwork random_network(std::mt19937_64& rng, std::size_t input_dim,
                                        const std::vector<std::size_t>& hidden, std::size_t task,
                                        double density = 1.0) {
  model::DenNetwork net(input_dim, hidden, rng());
  net.begin_initial_task();
  for (std::size_t t = 2; t <= task; ++t) net.add_output_node();
  std::bernoulli_distribution keep(density);
  std::uniform_real_distribution<double> bias(-0.2, 0.2);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& layer = net.layer(l);
    for (auto& w : layer.weights.values()) {
      if (!keep(rng)) w = 0.0;
    }
    for (auto& b : layer.biases) b = bias(rng);
  }
  return net;
}

// Reverse reachability from the last output row over edges with non-zero
// weight, via an explicit graph walk. Returns (layer, row) pairs.
inline std::set<std::pair<std::size_t, std::size_t>> brute_force_reachable(const model::DenNetwork& net) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  const std::size_t out = net.layer_count() - 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{out, net.layer(out).width() - 1}};
  while (!stack.empty()) {
    auto [l, r] = stack.back();
    stack.pop_back();
    if (!seen.insert({l, r}).second) continue;
    if (l == 0) continue;
    const auto& layer = net.layer(l);
    for (std::size_t c = 0; c < layer.fan_in(); ++c) {
      if (layer.weights(r, c) != 0.0) stack.push_back({l - 1, c});
    }
  }
  return seen;
}

// Small, fast settings for tests that train.
inline training::HyperParams quick_hp() {
  training::HyperParams hp;
  hp.epochs_per_stage = 5;
  hp.batch_size = 16;
  hp.hidden_sizes = {8, 4};
  return hp;
}

inline data::Dataset small_blobs(std::size_t categories, std::size_t per, std::size_t dim,
                                 double separation, std::uint64_t seed) {
  data::SyntheticSpec s;
  s.categories = categories;
  s.instances_per_category = per;
  s.dim = dim;
  s.separation = separation;
  s.seed = seed;
  return data::make_synthetic_stream(s);
}

}  // namespace openden::testing
