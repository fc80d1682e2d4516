#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "openden/data/dataset.hpp"
#include "openden/metrics/trial_log.hpp"
#include "openden/model/network.hpp"
#include "openden/training/hyperparams.hpp"

namespace openden::training {

using data::CategoryId;
using data::Dataset;
using model::DenNetwork;

// Known categories after task t: the first t + 1 entries of the order.
std::span<const CategoryId> known_after(std::span<const CategoryId> order, std::size_t task);

// Generators a trial draws from; sampling is kept apart from model training
// so different learners see the same rehearsal stream.
struct TrialRng {
  std::mt19937_64 sampler;
  std::mt19937_64 shuffle;

  explicit TrialRng(const TrialSeeds& seeds) : sampler(seeds.sampler), shuffle(seeds.shuffle) {}
};

// One task of the open-ended protocol. Task 1 is the initial binary task over
// order[0], order[1]; task t >= 2 introduces order[t].
metrics::TaskResult learn_task(DenNetwork& net, const Dataset& dataset,
                               std::span<const CategoryId> order, std::size_t task,
                               const HyperParams& hp, TrialRng& rng);

DenNetwork fresh_network(const Dataset& dataset, const HyperParams& hp, std::uint64_t model_seed);

// Full trial over a permutation of every category.
metrics::TrialLog run_trial(const Dataset& dataset, std::span<const CategoryId> order,
                            const HyperParams& hp, const TrialSeeds& seeds, std::size_t trial_id,
                            std::optional<DenNetwork>* final_network = nullptr);

enum class Baseline { den, naive_finetune, full_offline };

const char* to_string(Baseline b) noexcept;
Baseline parse_baseline(const std::string& name);

// Whole head fine-tuned on each new category alone: no rehearsal, selection
// or expansion.
metrics::TrialLog run_naive_finetune(const Dataset& dataset, std::span<const CategoryId> order,
                                     const HyperParams& hp, const TrialSeeds& seeds,
                                     std::size_t trial_id);

// At every task a fresh fixed network is trained jointly on all known categories.
metrics::TrialLog run_full_offline(const Dataset& dataset, std::span<const CategoryId> order,
                                   const HyperParams& hp, const TrialSeeds& seeds,
                                   std::size_t trial_id);

metrics::TrialLog run_baseline(Baseline which, const Dataset& dataset,
                               std::span<const CategoryId> order, const HyperParams& hp,
                               const TrialSeeds& seeds, std::size_t trial_id);

struct OfflineResult {
  DenNetwork net;
  double accuracy = 0.0;  // on the test split of `categories`
  std::size_t epochs = 0;
};

// Fixed architecture trained from scratch on the listed categories at once,
// with hidden widths `hidden` and the optimizer and budget from `hp`.
OfflineResult train_offline(const Dataset& dataset, std::span<const CategoryId> categories,
                            std::span<const std::size_t> hidden, const HyperParams& hp,
                            std::uint64_t model_seed, std::uint64_t shuffle_seed);

}  // namespace openden::training
