#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "openden/model/gradients.hpp"
#include "openden/model/network.hpp"
#include "openden/model/selection.hpp"
#include "openden/training/hyperparams.hpp"
#include "openden/training/rehearsal.hpp"

namespace openden::training {

using model::DenNetwork;
using model::TrainableMask;

// Penalties applied as proximal steps after each optimizer update.
struct Regularizer {
  double mu = 0.0;
  double lambda = 0.0;
  // Per-layer anchors shaped like the live weights; only read when lambda > 0.
  std::vector<Matrix> anchors;
};

struct StageStats {
  std::size_t epochs = 0;
  std::size_t steps = 0;
  double final_loss = 0.0;  // mean loss of the last epoch
  std::size_t sparsified = 0;
  bool skipped = false;
};

// Mini-batch training of the `mask` entries with shuffled batches from `rng`,
// followed by sparsification of those entries. Everything outside the mask is
// left bit-identical; with hp.verify_freeze this is checked and a violation
// raises ProtocolError.
StageStats train_stage(DenNetwork& net, const LabeledSet& data, const TrainableMask& mask,
                       const Regularizer& reg, const HyperParams& hp, std::mt19937_64& rng);

// Zeroes |w| < threshold among the masked weight entries only.
std::size_t sparsify_masked(DenNetwork& net, const TrainableMask& mask, double threshold);

// Bitwise comparison of every entry outside `mask`. Networks must share shapes.
bool frozen_entries_identical(const DenNetwork& before, const DenNetwork& after,
                              const TrainableMask& mask);

// Initial two-category task on a fresh network; every weight is trainable.
StageStats train_initial(DenNetwork& net, const LabeledSet& d1, const HyperParams& hp,
                         std::mt19937_64& rng);

// Whole output layer trainable, hidden layers frozen.
StageStats train_output_layer(DenNetwork& net, const LabeledSet& data, const HyperParams& hp,
                              std::mt19937_64& rng);

// Selected sub-network with L1 and drift toward the selection's snapshot.
// A degenerate selection trains nothing and returns skipped = true.
StageStats train_subnetwork(DenNetwork& net, const model::SubNetworkSelection& selection,
                            const LabeledSet& data, const HyperParams& hp, std::mt19937_64& rng);

// Entries an expansion stage may train: every inbound edge and bias of the
// new neurons, and the new columns of the output layer. Old rows are frozen.
TrainableMask expansion_mask(const DenNetwork& net, const std::vector<std::vector<model::NeuronId>>& added);

struct ExpansionOutcome {
  model::ExpansionReport report;
  StageStats stats;
};

// Adds k neurons per hidden layer, trains only those, sparsifies them and
// prunes new neurons whose outbound weights all fall below epsilon.
// report.accuracy_after is left for the caller.
ExpansionOutcome dynamic_expansion(DenNetwork& net, const LabeledSet& data, const HyperParams& hp,
                                   std::mt19937_64& rng);

}  // namespace openden::training
