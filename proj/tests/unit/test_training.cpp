#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "openden/error.hpp"
#include "openden/metrics/log_io.hpp"
#include "openden/metrics/metrics.hpp"
#include "openden/model/gradients.hpp"
#include "openden/model/selection.hpp"
#include "openden/training/hyperparams.hpp"
#include "openden/training/protocol.hpp"
#include "openden/training/rehearsal.hpp"
#include "openden/training/stages.hpp"
#include "support.hpp"

using namespace openden;
using namespace openden::training;
using openden::testing::quick_hp;
using openden::testing::random_network;
using openden::testing::same_bits;

namespace {

// Rows are (category, index) so draws can be identified.
Dataset indexed_dataset(const std::vector<std::size_t>& train_sizes) {
  Dataset ds;
  ds.feature_dim = 2;
  for (std::size_t c = 0; c < train_sizes.size(); ++c) {
    data::CategoryRecord rec;
    rec.id = c;
    rec.name = "c" + std::to_string(c);
    rec.train = Matrix(train_sizes[c], 2);
    for (std::size_t i = 0; i < train_sizes[c]; ++i) {
      rec.train(i, 0) = static_cast<double>(c);
      rec.train(i, 1) = static_cast<double>(i);
      rec.train_ids.push_back(rec.name + "_" + std::to_string(i));
    }
    rec.test = Matrix(1, 2);
    rec.test_ids.push_back(rec.name + "_test");
    ds.categories.push_back(std::move(rec));
  }
  return ds;
}

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

LabeledSet random_labeled(std::mt19937_64& rng, std::size_t n, std::size_t dim, std::size_t classes) {
  LabeledSet s;
  s.features = openden::testing::random_matrix(rng, n, dim, -2, 2);
  for (std::size_t i = 0; i < n; ++i) s.labels.push_back(i % classes);
  return s;
}

// Gaussian blobs: dims [0, 4) carry the old signal and dims [4, 8) only
// separate category 2 from category 0.
Dataset blind_spot_dataset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double s = 6.0;
  const std::vector<std::vector<double>> means{
      {s, 0, 0, 0, 0, 0, 0, 0}, {-s, 0, 0, 0, 0, 0, 0, 0}, {s, 0, 0, 0, s, s, s, s}};
  Dataset ds;
  ds.feature_dim = 8;
  for (std::size_t c = 0; c < 3; ++c) {
    data::CategoryRecord rec;
    rec.id = c;
    rec.name = "b" + std::to_string(c);
    rec.train = Matrix(120, 8);
    rec.test = Matrix(40, 8);
    for (auto* m : {&rec.train, &rec.test}) {
      for (std::size_t r = 0; r < m->rows(); ++r) {
        for (std::size_t j = 0; j < 8; ++j) (*m)(r, j) = means[c][j] + noise(rng);
      }
    }
    for (std::size_t i = 0; i < 120; ++i) rec.train_ids.push_back(rec.name + "_tr" + std::to_string(i));
    for (std::size_t i = 0; i < 40; ++i) rec.test_ids.push_back(rec.name + "_te" + std::to_string(i));
    ds.categories.push_back(std::move(rec));
  }
  return ds;
}

// Plain minibatch SGD on softmax cross-entropy for a two-hidden-layer ReLU
// net, written without the library's backprop. Only entries with
// trainable[l] set are updated.
struct RefNet {
  std::vector<std::vector<std::vector<double>>> w;  // [layer][row][col]
  std::vector<std::vector<double>> b;
};

RefNet to_ref(const model::DenNetwork& net) {
  RefNet r;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    std::vector<std::vector<double>> rows(layer.width(), std::vector<double>(layer.fan_in()));
    for (std::size_t i = 0; i < layer.width(); ++i) {
      for (std::size_t j = 0; j < layer.fan_in(); ++j) rows[i][j] = layer.weights(i, j);
    }
    r.w.push_back(rows);
    r.b.push_back(layer.biases);
  }
  return r;
}

void reference_sgd(RefNet& net, const LabeledSet& data, const model::TrainableMask& mask, double lr,
                   std::size_t epochs, std::size_t batch, std::mt19937_64 rng) {
  const std::size_t L = net.w.size();
  const std::size_t n = data.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      auto gw = net.w;
      auto gb = net.b;
      for (auto& layer : gw) for (auto& row : layer) std::fill(row.begin(), row.end(), 0.0);
      for (auto& v : gb) std::fill(v.begin(), v.end(), 0.0);
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t idx = perm[start + k];
        std::vector<std::vector<double>> act{std::vector<double>(data.features.row(idx).begin(),
                                                                 data.features.row(idx).end())};
        for (std::size_t l = 0; l < L; ++l) {
          std::vector<double> z(net.w[l].size());
          for (std::size_t i = 0; i < z.size(); ++i) {
            double s = net.b[l][i];
            for (std::size_t j = 0; j < act[l].size(); ++j) s += net.w[l][i][j] * act[l][j];
            z[i] = (l + 1 < L) ? std::max(0.0, s) : s;
          }
          act.push_back(z);
        }
        const auto& logits = act.back();
        const double mx = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (double v : logits) denom += std::exp(v - mx);
        std::vector<double> delta(logits.size());
        for (std::size_t i = 0; i < logits.size(); ++i) {
          delta[i] = std::exp(logits[i] - mx) / denom - (i == data.labels[idx] ? 1.0 : 0.0);
          delta[i] /= static_cast<double>(len);
        }
        for (std::size_t l = L; l-- > 0;) {
          for (std::size_t i = 0; i < delta.size(); ++i) {
            gb[l][i] += delta[i];
            for (std::size_t j = 0; j < act[l].size(); ++j) gw[l][i][j] += delta[i] * act[l][j];
          }
          if (l == 0) break;
          std::vector<double> below(act[l].size(), 0.0);
          for (std::size_t j = 0; j < below.size(); ++j) {
            for (std::size_t i = 0; i < delta.size(); ++i) below[j] += net.w[l][i][j] * delta[i];
            if (act[l][j] <= 0.0) below[j] = 0.0;
          }
          delta = below;
        }
      }
      for (std::size_t l = 0; l < L; ++l) {
        const std::size_t cols = net.w[l].empty() ? 0 : net.w[l][0].size();
        for (std::size_t i = 0; i < net.w[l].size(); ++i) {
          for (std::size_t j = 0; j < cols; ++j) {
            if (mask.weights[l][i * cols + j]) net.w[l][i][j] -= lr * gw[l][i][j];
          }
          if (mask.biases[l][i]) net.b[l][i] -= lr * gb[l][i];
        }
      }
    }
  }
}

// Accuracy of `cat` (labelled `label`) with the argmax limited to the first `outputs` logits.
double restricted_accuracy(const model::DenNetwork& net, const data::CategoryRecord& cat, std::size_t label,
                           std::size_t outputs) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < cat.test.rows(); ++r) {
    const auto z = net.forward(cat.test.row(r));
    const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.begin() + outputs) - z.begin());
    correct += best == label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(cat.test.rows());
}

}  // namespace

TEST_SUITE("hyperparams") {
  TEST_CASE("defaults validate and resolve widths") {
    HyperParams hp;
    hp.validate();
    CHECK(hp.mu == 1e-4);
    CHECK(hp.lambda_drift == 1e-2);
    CHECK(hp.rho == 10);
    CHECK(hp.tau == 0.85);
    CHECK(hp.k == 32);
    CHECK(hp.epsilon_prune == 1e-3);
    CHECK(hp.zero_threshold == 1e-4);
    CHECK(hp.epochs_per_stage == 20);
    CHECK(hp.batch_size == 32);
    CHECK(hp.resolved_hidden_sizes(1280) == std::vector<std::size_t>{256, 128});
    CHECK(hp.resolved_hidden_sizes(32) == std::vector<std::size_t>{8, 4});
    hp.hidden_sizes = {5, 3};
    CHECK(hp.resolved_hidden_sizes(1280) == std::vector<std::size_t>{5, 3});
  }

  TEST_CASE("invalid fields") {
    auto bad = [](auto edit) {
      HyperParams hp;
      edit(hp);
      CHECK_THROWS_AS(hp.validate(), ConfigError);
    };
    bad([](HyperParams& h) { h.tau = 1.5; });
    bad([](HyperParams& h) { h.mu = -1; });
    bad([](HyperParams& h) { h.lambda_drift = -1; });
    bad([](HyperParams& h) { h.rho = 0; });
    bad([](HyperParams& h) { h.k = 0; });
    bad([](HyperParams& h) { h.epsilon_prune = -1; });
    bad([](HyperParams& h) { h.zero_threshold = -1; });
    bad([](HyperParams& h) { h.batch_size = 0; });
    bad([](HyperParams& h) { h.optimizer.learning_rate = 0; });
  }

  TEST_CASE("fingerprint tracks every field") {
    HyperParams a, b;
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint().size() == 16);
    b.k = 31;
    CHECK(a.fingerprint() != b.fingerprint());
  }

  TEST_CASE("seeds are split per trial and purpose") {
    const auto s1 = TrialSeeds::derive(5, 1);
    const auto s1b = TrialSeeds::derive(5, 1);
    const auto s2 = TrialSeeds::derive(5, 2);
    CHECK(s1.order == s1b.order);
    CHECK(s1.order != s2.order);
    std::set<std::uint64_t> distinct{s1.order, s1.sampler, s1.model, s1.shuffle};
    CHECK(distinct.size() == 4);
    CHECK(derive_seed(5, 1, SeedPurpose::model) == s1.model);
    CHECK(derive_seed(6, 1, SeedPurpose::model) != s1.model);
  }

  TEST_CASE("category order is a seeded permutation") {
    auto a = category_order(40, 3);
    CHECK(a == category_order(40, 3));
    CHECK(a != category_order(40, 4));
    std::sort(a.begin(), a.end());
    CHECK(a == identity_order(40));
  }
}

TEST_SUITE("sample_rehearsal") {
  TEST_CASE("quota arithmetic") {
    CHECK(rehearsal_quota(100, 4, 10) == 25);
    CHECK(rehearsal_quota(50, 10, 10) == 10);
    CHECK(rehearsal_quota(40, 1, 10) == 40);
    CHECK(plan_rehearsal(40, std::vector<std::size_t>{30}, 10) == std::vector<std::size_t>{30});
    CHECK_THROWS_AS(plan_rehearsal(0, std::vector<std::size_t>{30}, 10), DataError);
    CHECK_THROWS_AS(plan_rehearsal(10, std::vector<std::size_t>{30, 0}, 10), DataError);
  }

  TEST_CASE("worked cases") {
    std::mt19937_64 rng(1);
    {
      const auto ds = indexed_dataset({200, 200, 200, 200, 100});
      const auto order = identity_order(5);
      const auto s = sample_rehearsal(ds, order, 10, rng);
      CHECK(s.size() == 200);
      for (std::size_t c = 0; c < 4; ++c) CHECK(std::count(s.labels.begin(), s.labels.end(), c) == 25);
      CHECK(std::count(s.labels.begin(), s.labels.end(), 4u) == 100);
    }
    {
      std::vector<std::size_t> sizes(10, 200);
      sizes.push_back(50);
      const auto ds = indexed_dataset(sizes);
      const auto s = sample_rehearsal(ds, identity_order(11), 10, rng);
      CHECK(s.size() == 150);
    }
    {
      const auto ds = indexed_dataset({30, 40});
      const auto s = sample_rehearsal(ds, identity_order(2), 10, rng);
      CHECK(s.size() == 70);
      // The capped draw takes every instance exactly once.
      std::set<double> seen;
      for (std::size_t r = 0; r < s.size(); ++r) {
        if (s.labels[r] == 0) seen.insert(s.features(r, 1));
      }
      CHECK(seen.size() == 30);
    }
  }

  TEST_CASE("draws are without replacement and follow the stream labels") {
    std::mt19937_64 rng(2);
    const auto ds = indexed_dataset({50, 50, 50, 20});
    const std::vector<std::size_t> stream{2, 0, 3, 1};
    const auto s = sample_rehearsal(ds, stream, 10, rng);
    std::map<std::size_t, std::set<double>> seen;
    for (std::size_t r = 0; r < s.size(); ++r) {
      const auto cat = static_cast<std::size_t>(s.features(r, 0));
      CHECK(stream[s.labels[r]] == cat);
      CHECK(seen[cat].insert(s.features(r, 1)).second);
    }
  }

  TEST_CASE("empty new category") {
    std::mt19937_64 rng(3);
    auto ds = indexed_dataset({10, 10});
    ds.categories[1].train = Matrix(0, 2);
    CHECK_THROWS_AS(sample_rehearsal(ds, identity_order(2), 10, rng), DataError);
  }

  TEST_CASE("instances are drawn uniformly (chi-squared)") {
    std::mt19937_64 rng(4);
    const auto ds = indexed_dataset({30, 30, 10});
    std::vector<double> counts(30, 0.0);
    std::vector<double> per_category(2, 0.0);
    const std::size_t invocations = 1000;
    for (std::size_t i = 0; i < invocations; ++i) {
      const auto s = sample_rehearsal(ds, identity_order(3), 10, rng);
      for (std::size_t r = 0; r < s.size(); ++r) {
        if (s.labels[r] < 2) per_category[s.labels[r]] += 1.0;
        if (s.labels[r] == 0) counts[static_cast<std::size_t>(s.features(r, 1))] += 1.0;
      }
    }
    CHECK(per_category[0] == per_category[1]);
    const double expected = 10.0 * invocations / 30.0;
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    boost::math::chi_squared dist(29.0);
    const double p = 1.0 - boost::math::cdf(dist, stat);
    CHECK(p > 0.01);
  }
}

TEST_SUITE("train_initial") {
  TEST_CASE("separable blobs are fitted perfectly") {
    const auto ds = openden::testing::small_blobs(2, 100, 6, 10.0, 1);
    const std::vector<std::size_t> cats{0, 1};
    const auto d1 = training_rows(ds, cats);
    auto hp = quick_hp();
    hp.epochs_per_stage = 20;
    auto net = fresh_network(ds, hp, 3);
    std::mt19937_64 rng(4);
    train_initial(net, d1, hp, rng);
    CHECK(net.generation() == 1);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < d1.size(); ++r) {
      const auto z = net.forward(d1.features.row(r));
      correct += (z[1] > z[0]) == (d1.labels[r] == 1) ? 1 : 0;
    }
    CHECK(correct == d1.size());
  }

  TEST_CASE("a huge L1 coefficient zeroes every weight") {
    const auto ds = openden::testing::small_blobs(2, 100, 6, 10.0, 1);
    const std::vector<std::size_t> cats{0, 1};
    HyperParams hp;
    hp.hidden_sizes = {8, 4};
    hp.mu = 10.0;
    auto net = fresh_network(ds, hp, 3);
    std::mt19937_64 rng(4);
    train_initial(net, training_rows(ds, cats), hp, rng);
    for (const auto& layer : net.layers()) {
      for (double w : layer.weights.values()) CHECK(w == 0.0);
    }
    CHECK(metrics::task_accuracy(net, ds, cats) == doctest::Approx(0.5));
  }

  TEST_CASE("deterministic") {
    const auto ds = openden::testing::small_blobs(2, 60, 5, 4.0, 2);
    const std::vector<std::size_t> cats{0, 1};
    const auto d1 = training_rows(ds, cats);
    auto hp = quick_hp();
    auto a = fresh_network(ds, hp, 9);
    auto b = fresh_network(ds, hp, 9);
    std::mt19937_64 ra(1), rb(1);
    train_initial(a, d1, hp, ra);
    train_initial(b, d1, hp, rb);
    CHECK(a.identical_to(b));
  }

  TEST_CASE("needs exactly two categories on a fresh network") {
    const auto ds = openden::testing::small_blobs(3, 20, 4, 4.0, 2);
    const std::vector<std::size_t> three{0, 1, 2};
    const std::vector<std::size_t> one{0};
    auto hp = quick_hp();
    std::mt19937_64 rng(1);
    auto net = fresh_network(ds, hp, 1);
    CHECK_THROWS_AS(train_initial(net, training_rows(ds, three), hp, rng), ProtocolError);
    CHECK_THROWS_AS(train_initial(net, training_rows(ds, one), hp, rng), ProtocolError);
    const std::vector<std::size_t> two{0, 1};
    train_initial(net, training_rows(ds, two), hp, rng);
    CHECK_THROWS_AS(train_initial(net, training_rows(ds, two), hp, rng), ProtocolError);
  }
}

TEST_SUITE("train_output_layer") {
  TEST_CASE("hidden layers stay bit-identical") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      auto net = random_network(rng, 5, {6, 4}, 3, 0.8);
      const auto before = net;
      const auto data = random_labeled(rng, 40, 5, 3);
      auto hp = quick_hp();
      train_output_layer(net, data, hp, rng);
      for (std::size_t l = 0; l + 1 < net.layer_count(); ++l) {
        CHECK(before.layer(l) == net.layer(l));
        CHECK(numerics::bit_identical(before.layer(l).weights.values(), net.layer(l).weights.values()));
        CHECK(numerics::bit_identical(before.layer(l).biases, net.layer(l).biases));
      }
      CHECK_FALSE(numerics::bit_identical(before.output_layer().weights.values(),
                                          net.output_layer().weights.values()));
    }
  }

  TEST_CASE("zero hidden activations fit the class priors") {
    auto ds = openden::testing::small_blobs(3, 50, 4, 3.0, 6);
    // 75 / 25 / 25 training rows.
    ds.categories[0] = openden::testing::small_blobs(3, 94, 4, 3.0, 7).categories[0];
    auto hp = quick_hp();
    hp.epochs_per_stage = 200;
    hp.optimizer.learning_rate = 0.02;
    auto net = fresh_network(ds, hp, 1);
    net.begin_initial_task();
    net.add_output_node();
    for (std::size_t l = 0; l + 1 < net.layer_count(); ++l) {
      net.layer(l).weights.fill(0.0);
      std::fill(net.layer(l).biases.begin(), net.layer(l).biases.end(), 0.0);
    }
    const std::vector<std::size_t> cats{0, 1, 2};
    const auto data = training_rows(ds, cats);
    std::mt19937_64 rng(3);
    train_output_layer(net, data, hp, rng);
    const auto& b = net.output_layer().biases;
    const double mx = *std::max_element(b.begin(), b.end());
    double denom = 0.0;
    for (double v : b) denom += std::exp(v - mx);
    const double n = static_cast<double>(data.size());
    for (std::size_t c = 0; c < 3; ++c) {
      const double prior = static_cast<double>(std::count(data.labels.begin(), data.labels.end(), c)) / n;
      CHECK(std::exp(b[c] - mx) / denom == doctest::Approx(prior).epsilon(0.02));
    }
    const double majority = static_cast<double>(ds.categories[0].test.rows()) /
                            static_cast<double>(ds.test_size());
    CHECK(metrics::task_accuracy(net, ds, cats) == doctest::Approx(majority).epsilon(1e-12));
  }
}

TEST_SUITE("train_subnetwork") {
  TEST_CASE("a dominant drift term holds the snapshot") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
      auto net = random_network(rng, 5, {6, 4}, 3, 0.8);
      const auto sel = model::select_subnetwork(net, 3);
      if (sel.degenerate()) continue;
      auto hp = quick_hp();
      hp.lambda_drift = 1e6;
      hp.zero_threshold = 0.0;
      const auto before = net;
      train_subnetwork(net, sel, random_labeled(rng, 40, 5, 3), hp, rng);
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto a = before.layer(l).weights.values();
        const auto b = net.layer(l).weights.values();
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9);
      }
    }
  }

  TEST_CASE("unregularized training matches an independent trainer") {
    std::mt19937_64 rng(8);
    // 2 + 1 hidden neurons and 3 outputs.
    auto net = random_network(rng, 4, {2, 1}, 2);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      for (auto& w : net.layer(l).weights.values()) w = 0.3 + std::abs(w);
      for (auto& b : net.layer(l).biases) b = 0.1;
    }
    const auto sel = model::select_subnetwork(net, 2);
    REQUIRE(sel.hidden_counts() == std::vector<std::size_t>{2, 1});
    auto hp = quick_hp();
    hp.mu = 0.0;
    hp.lambda_drift = 0.0;
    hp.zero_threshold = 0.0;
    hp.epochs_per_stage = 6;
    hp.batch_size = 5;
    hp.optimizer.kind = numerics::OptimizerKind::sgd;
    hp.optimizer.learning_rate = 0.05;
    const auto data = random_labeled(rng, 13, 4, 3);

    RefNet ref = to_ref(net);
    std::mt19937_64 shuffle(99);
    reference_sgd(ref, data, sel.trainable, 0.05, 6, 5, shuffle);
    train_subnetwork(net, sel, data, hp, shuffle);

    double worst = 0.0;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      const auto& layer = net.layer(l);
      for (std::size_t i = 0; i < layer.width(); ++i) {
        for (std::size_t j = 0; j < layer.fan_in(); ++j) {
          worst = std::max(worst, std::abs(layer.weights(i, j) - ref.w[l][i][j]));
        }
        worst = std::max(worst, std::abs(layer.biases[i] - ref.b[l][i]));
      }
    }
    CHECK(worst <= 1e-10);
    // Old output rows are outside the selection.
    CHECK(ref.w[2][0][0] == net.layer(2).weights(0, 0));
  }

  TEST_CASE("non-selected entries are bit-identical") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      auto net = random_network(rng, 6, {7, 5}, 4, 0.35);
      const auto sel = model::select_subnetwork(net, 4);
      const auto before = net;
      auto hp = quick_hp();
      const auto stats = train_subnetwork(net, sel, random_labeled(rng, 30, 6, 4), hp, rng);
      CHECK(frozen_entries_identical(before, net, sel.trainable));
      if (sel.degenerate()) {
        CHECK(stats.skipped);
        CHECK(net.identical_to(before));
      }
    }
  }
}

TEST_SUITE("dynamic_expansion") {
  TEST_CASE("total pruning restores the widths") {
    std::mt19937_64 rng(10);
    auto net = random_network(rng, 5, {6, 4}, 2);
    net.add_output_node();
    const auto before = net;
    auto hp = quick_hp();
    hp.k = 10;
    hp.mu = 1e4;
    const auto out = dynamic_expansion(net, random_labeled(rng, 40, 5, 3), hp, rng);
    CHECK(out.report.added == std::vector<std::size_t>{10, 10});
    CHECK(out.report.removed == std::vector<std::size_t>{10, 10});
    CHECK(net.hidden_widths() == before.hidden_widths());
    CHECK(preserves_parameters(before, net));
  }

  TEST_CASE("old parameters and old logits are untouched") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      auto net = random_network(rng, 5, {6, 4}, 2, 0.7);
      net.add_output_node();
      const auto before = net;
      auto hp = quick_hp();
      hp.k = 4;
      dynamic_expansion(net, random_labeled(rng, 40, 5, 3), hp, rng);
      CHECK(model::preserves_parameters(before, net));
      for (int i = 0; i < 20; ++i) {
        const auto x = openden::testing::random_vector(rng, 5, -3, 3);
        const auto z0 = before.forward(x);
        const auto z1 = net.forward(x);
        for (std::size_t j = 0; j + 1 < z0.size(); ++j) CHECK(same_bits(z0[j], z1[j]));
      }
    }
  }

  TEST_CASE("expansion lifts a task the frozen features cannot see") {
    const auto ds = blind_spot_dataset(3);
    const auto order = identity_order(3);
    auto hp = HyperParams{};
    hp.hidden_sizes = {8, 4};
    hp.lambda_drift = 1e6;
    hp.k = 8;
    const auto seeds = TrialSeeds::derive(1, 1);
    TrialRng rng(seeds);
    auto net = fresh_network(ds, hp, seeds.model);
    learn_task(net, ds, order, 1, hp, rng);
    // Blind the old layer-1 neurons to the extra dimensions.
    for (std::size_t r = 0; r < net.layer(0).width(); ++r) {
      for (std::size_t c = 4; c < 8; ++c) net.layer(0).weights(r, c) = 0.0;
    }
    const auto res = learn_task(net, ds, order, 2, hp, rng);
    REQUIRE(res.expanded);
    REQUIRE(res.accuracy_before_expansion.has_value());
    CHECK(*res.accuracy_before_expansion < hp.tau);
    CHECK(res.accuracy > *res.accuracy_before_expansion);

    const auto oracle = train_offline(ds, order, net.hidden_widths(), hp, seeds.model, seeds.shuffle);
    CHECK(oracle.accuracy > *res.accuracy_before_expansion);
  }
}

TEST_SUITE("learn_task") {
  TEST_CASE("tau zero never expands") {
    const auto ds = openden::testing::small_blobs(6, 40, 6, 1.0, 1);
    auto hp = quick_hp();
    hp.tau = 0.0;
    const auto order = category_order(6, 2);
    const auto log = run_trial(ds, order, hp, TrialSeeds::derive(3, 1), 1);
    for (const auto& t : log.tasks) CHECK_FALSE(t.expanded);
  }

  TEST_CASE("tau one expands every later task with bounded growth") {
    const auto ds = openden::testing::small_blobs(6, 40, 6, 0.5, 1);
    auto hp = quick_hp();
    hp.tau = 1.0;
    hp.k = 3;
    const auto order = category_order(6, 2);
    const auto log = run_trial(ds, order, hp, TrialSeeds::derive(3, 1), 1);
    REQUIRE(log.tasks.size() == 5);
    for (std::size_t i = 1; i < log.tasks.size(); ++i) {
      CHECK(log.tasks[i].expanded);
      std::size_t growth = 0;
      for (std::size_t l = 0; l < 2; ++l) {
        const auto now = log.tasks[i].neurons[l];
        const auto prev = log.tasks[i - 1].neurons[l];
        CHECK(now >= prev);
        growth += now - prev;
      }
      CHECK(growth <= hp.k * 2);
    }
  }

  TEST_CASE("raising tau never lowers the number of expansions") {
    const auto ds = openden::testing::small_blobs(8, 60, 8, 3.0, 5);
    const auto order = category_order(8, 1);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      std::size_t previous = 0;
      for (double tau : {0.0, 0.5, 0.7, 0.85, 0.95, 1.0}) {
        auto hp = quick_hp();
        hp.tau = tau;
        const auto log = run_trial(ds, order, hp, TrialSeeds::derive(seed, 1), 1);
        std::size_t n = 0;
        for (const auto& t : log.tasks) n += t.expanded ? 1 : 0;
        CHECK(n >= previous);
        previous = n;
      }
    }
  }

  TEST_CASE("tasks must arrive in sequence") {
    const auto ds = openden::testing::small_blobs(4, 20, 4, 4.0, 1);
    auto hp = quick_hp();
    const auto seeds = TrialSeeds::derive(0, 1);
    TrialRng rng(seeds);
    auto net = fresh_network(ds, hp, seeds.model);
    const auto order = identity_order(4);
    CHECK_THROWS_AS(learn_task(net, ds, order, 2, hp, rng), ProtocolError);
  }
}

TEST_SUITE("run_trial") {
  TEST_CASE("task counts follow the category count") {
    auto hp = quick_hp();
    hp.epochs_per_stage = 1;
    hp.hidden_sizes = {4, 2};
    hp.k = 2;
    for (std::size_t c : {std::size_t{40}, std::size_t{51}}) {
      const auto ds = openden::testing::small_blobs(c, 10, 4, 6.0, 1);
      const auto order = category_order(c, 3);
      const auto log = run_trial(ds, order, hp, TrialSeeds::derive(0, 1), 1);
      CHECK(log.tasks.size() == c - 1);
      CHECK(log.categories_learned() == c);
      for (std::size_t i = 0; i < log.tasks.size(); ++i) {
        CHECK(log.tasks[i].task == i + 1);
        CHECK(log.tasks[i].accuracy >= 0.0);
        CHECK(log.tasks[i].accuracy <= 1.0);
      }
    }
  }

  TEST_CASE("identical seeds give identical logs") {
    const auto ds = openden::testing::small_blobs(6, 40, 6, 3.0, 2);
    const auto order = category_order(6, 7);
    auto hp = quick_hp();
    std::optional<model::DenNetwork> fa, fb;
    const auto a = run_trial(ds, order, hp, TrialSeeds::derive(4, 2), 2, &fa);
    const auto b = run_trial(ds, order, hp, TrialSeeds::derive(4, 2), 2, &fb);
    CHECK(metrics::trial_csv(a) == metrics::trial_csv(b));
    CHECK(fa->identical_to(*fb));
  }

  TEST_CASE("order must be a permutation") {
    const auto ds = openden::testing::small_blobs(4, 20, 4, 4.0, 1);
    const std::vector<std::size_t> bad{0, 1, 1, 3};
    CHECK_THROWS(run_trial(ds, bad, quick_hp(), TrialSeeds::derive(0, 1), 1));
  }

  TEST_CASE("expansion never changes accuracy of earlier categories") {
    const auto ds = openden::testing::small_blobs(6, 60, 6, 2.0, 3);
    const auto order = category_order(6, 2);
    auto hp = quick_hp();
    hp.tau = 1.0;
    const auto seeds = TrialSeeds::derive(2, 1);
    TrialRng rng(seeds);
    auto net = fresh_network(ds, hp, seeds.model);
    learn_task(net, ds, order, 1, hp, rng);
    for (std::size_t t = 2; t < 6; ++t) {
      // Replay the stages up to the gate by hand, then compare around the expansion.
      net.add_output_node();
      const auto known = known_after(order, t);
      const auto data = sample_rehearsal(ds, known, hp.rho, rng.sampler);
      train_output_layer(net, data, hp, rng.shuffle);
      const auto sel = model::select_subnetwork(net, t);
      train_subnetwork(net, sel, data, hp, rng.shuffle);
      const auto old_known = known.first(known.size() - 1);
      const auto before = metrics::per_category_accuracy(net, ds, known);
      const auto snapshot = net;
      dynamic_expansion(net, data, hp, rng.shuffle);
      const auto after = metrics::per_category_accuracy(net, ds, known);
      CHECK(model::preserves_parameters(snapshot, net));
      for (std::size_t i = 0; i < old_known.size(); ++i) {
        const auto& cat = ds.categories[old_known[i]];
        CHECK(restricted_accuracy(snapshot, cat, i, old_known.size()) ==
              restricted_accuracy(net, cat, i, old_known.size()));
      }
      CHECK(before.size() == after.size());
    }
  }
}

TEST_SUITE("baselines") {
  TEST_CASE("naive fine-tuning forgets and shares the stream") {
    const auto ds = openden::testing::small_blobs(6, 60, 8, 6.0, 4);
    const auto order = category_order(6, 3);
    auto hp = quick_hp();
    const auto seeds = TrialSeeds::derive(9, 1);
    const auto den = run_trial(ds, order, hp, seeds, 1);
    const auto naive = run_naive_finetune(ds, order, hp, seeds, 1);
    CHECK(naive.tasks.size() == den.tasks.size());
    CHECK(naive.order == den.order);
    CHECK(naive.tasks.back().accuracy < den.tasks.back().accuracy);
    CHECK(parse_baseline("naive_finetune") == Baseline::naive_finetune);
    CHECK_THROWS_AS(parse_baseline("ewc"), ConfigError);
  }

  TEST_CASE("offline training reaches high accuracy on separable data") {
    const auto ds = openden::testing::small_blobs(5, 60, 8, 10.0, 4);
    const auto cats = identity_order(5);
    auto hp = quick_hp();
    hp.epochs_per_stage = 60;
    const std::vector<std::size_t> hidden{8, 4};
    const auto r = train_offline(ds, cats, hidden, hp, 1, 2);
    CHECK(r.net.num_categories() == 5);
    CHECK(r.accuracy >= 0.95);
    const auto again = train_offline(ds, cats, hidden, hp, 1, 2);
    CHECK(r.net.identical_to(again.net));
  }
}
