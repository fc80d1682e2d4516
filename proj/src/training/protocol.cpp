#include "openden/training/protocol.hpp"

#include <chrono>
#include <string>

#include "openden/error.hpp"
#include "openden/metrics/metrics.hpp"
#include "openden/model/selection.hpp"
#include "openden/training/rehearsal.hpp"
#include "openden/training/stages.hpp"

namespace openden::training {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since, const HyperParams& hp) {
  if (!hp.log_wall_time) return 0.0;
  return std::chrono::duration<double>(Clock::now() - since).count();
}

void check_order(const Dataset& dataset, std::span<const CategoryId> order) {
  if (order.size() != dataset.category_count()) {
    throw ProtocolError("category order must list every category exactly once");
  }
  std::vector<bool> seen(order.size(), false);
  for (CategoryId c : order) {
    if (c >= order.size() || seen[c]) throw ProtocolError("category order is not a permutation");
    seen[c] = true;
  }
  if (order.size() < 2) throw DataError("an open-ended trial needs at least 2 categories");
}

metrics::TaskResult start_result(std::span<const CategoryId> order, std::size_t task) {
  metrics::TaskResult r;
  r.task = task;
  if (task == 1) {
    r.categories = {order[0], order[1]};
  } else {
    r.categories = {order[task]};
  }
  return r;
}

metrics::TrialLog start_log(std::span<const CategoryId> order, const HyperParams& hp,
                            const TrialSeeds& seeds, std::size_t trial_id) {
  metrics::TrialLog log;
  log.trial_id = trial_id;
  log.order.assign(order.begin(), order.end());
  log.hyperparam_fingerprint = hp.fingerprint();
  log.seed = seeds.model;
  return log;
}

void grow_outputs(DenNetwork& net, std::size_t count) {
  net.begin_initial_task();
  while (net.num_categories() < count) net.add_output_node();
}

}  // namespace

std::span<const CategoryId> known_after(std::span<const CategoryId> order, std::size_t task) {
  if (task == 0 || task + 1 > order.size()) {
    throw IndexError("task " + std::to_string(task) + " is outside a stream of " +
                     std::to_string(order.size()) + " categories");
  }
  return order.first(task + 1);
}

DenNetwork fresh_network(const Dataset& dataset, const HyperParams& hp, std::uint64_t model_seed) {
  return DenNetwork(dataset.feature_dim, hp.resolved_hidden_sizes(dataset.feature_dim), model_seed,
                    model::NetworkOptions{hp.connect_all_outputs});
}

metrics::TaskResult learn_task(DenNetwork& net, const Dataset& dataset,
                               std::span<const CategoryId> order, std::size_t task,
                               const HyperParams& hp, TrialRng& rng) {
  const auto t0 = Clock::now();
  const auto known = known_after(order, task);
  if (net.generation() + 1 != task) {
    throw ProtocolError("learn_task: task " + std::to_string(task) + " requested but the network has learned " +
                        std::to_string(net.generation()) + " tasks");
  }
  metrics::TaskResult r = start_result(order, task);

  if (task == 1) {
    const LabeledSet d1 = training_rows(dataset, known);
    r.epochs = train_initial(net, d1, hp, rng.shuffle).epochs;
    r.accuracy = metrics::task_accuracy(net, dataset, known);
    r.selected.assign(net.hidden_layer_count(), 0);
    r.neurons = net.hidden_widths();
    r.seconds = elapsed(t0, hp);
    return r;
  }

  net.add_output_node();
  const LabeledSet rehearsal = sample_rehearsal(dataset, known, hp.rho, rng.sampler);
  r.epochs += train_output_layer(net, rehearsal, hp, rng.shuffle).epochs;

  const auto selection = model::select_subnetwork(net, task);
  r.selected = selection.hidden_counts();
  r.degenerate_selection = selection.degenerate();
  r.epochs += train_subnetwork(net, selection, rehearsal, hp, rng.shuffle).epochs;
  r.accuracy = metrics::task_accuracy(net, dataset, known);

  if (r.accuracy < hp.tau) {
    r.accuracy_before_expansion = r.accuracy;
    auto grown = dynamic_expansion(net, rehearsal, hp, rng.shuffle);
    r.epochs += grown.stats.epochs;
    r.accuracy = metrics::task_accuracy(net, dataset, known);
    grown.report.accuracy_after = r.accuracy;
    if (!hp.log_wall_time) grown.report.seconds = 0.0;
    r.expansion = grown.report;
    r.expanded = true;
  }
  r.neurons = net.hidden_widths();
  r.seconds = elapsed(t0, hp);
  return r;
}

metrics::TrialLog run_trial(const Dataset& dataset, std::span<const CategoryId> order,
                            const HyperParams& hp, const TrialSeeds& seeds, std::size_t trial_id,
                            std::optional<DenNetwork>* final_network) {
  hp.validate();
  check_order(dataset, order);
  metrics::TrialLog log = start_log(order, hp, seeds, trial_id);
  DenNetwork net = fresh_network(dataset, hp, seeds.model);
  TrialRng rng(seeds);
  for (std::size_t t = 1; t < order.size(); ++t) {
    log.tasks.push_back(learn_task(net, dataset, order, t, hp, rng));
  }
  log.final_parameters = net.parameter_count();
  if (final_network) *final_network = std::move(net);
  return log;
}

const char* to_string(Baseline b) noexcept {
  switch (b) {
    case Baseline::den: return "den";
    case Baseline::naive_finetune: return "naive_finetune";
    case Baseline::full_offline: return "full_offline";
  }
  return "?";
}

Baseline parse_baseline(const std::string& name) {
  if (name == "den") return Baseline::den;
  if (name == "naive_finetune") return Baseline::naive_finetune;
  if (name == "full_offline") return Baseline::full_offline;
  throw ConfigError("baseline must be den, naive_finetune or full_offline, got '" + name + "'");
}

metrics::TrialLog run_naive_finetune(const Dataset& dataset, std::span<const CategoryId> order,
                                     const HyperParams& hp, const TrialSeeds& seeds,
                                     std::size_t trial_id) {
  hp.validate();
  check_order(dataset, order);
  metrics::TrialLog log = start_log(order, hp, seeds, trial_id);
  DenNetwork net = fresh_network(dataset, hp, seeds.model);
  TrialRng rng(seeds);
  for (std::size_t t = 1; t < order.size(); ++t) {
    const auto t0 = Clock::now();
    const auto known = known_after(order, t);
    metrics::TaskResult r = start_result(order, t);
    if (t == 1) {
      r.epochs = train_initial(net, training_rows(dataset, known), hp, rng.shuffle).epochs;
    } else {
      net.add_output_node();
      LabeledSet fresh = training_rows(dataset, known.last(1));
      for (auto& y : fresh.labels) y = t;
      r.epochs = train_stage(net, fresh, TrainableMask::all(net), {hp.mu, 0.0, {}}, hp, rng.shuffle).epochs;
    }
    r.accuracy = metrics::task_accuracy(net, dataset, known);
    r.selected.assign(net.hidden_layer_count(), 0);
    r.neurons = net.hidden_widths();
    r.seconds = elapsed(t0, hp);
    log.tasks.push_back(std::move(r));
  }
  log.final_parameters = net.parameter_count();
  return log;
}

OfflineResult train_offline(const Dataset& dataset, std::span<const CategoryId> categories,
                            std::span<const std::size_t> hidden, const HyperParams& hp,
                            std::uint64_t model_seed, std::uint64_t shuffle_seed) {
  if (categories.size() < 2) throw DataError("train_offline: need at least 2 categories");
  DenNetwork net(dataset.feature_dim, hidden, model_seed);
  grow_outputs(net, categories.size());
  std::mt19937_64 rng(shuffle_seed);
  const auto stats =
      train_stage(net, training_rows(dataset, categories), TrainableMask::all(net), {hp.mu, 0.0, {}}, hp, rng);
  const double acc = metrics::task_accuracy(net, dataset, categories);
  return {std::move(net), acc, stats.epochs};
}

metrics::TrialLog run_full_offline(const Dataset& dataset, std::span<const CategoryId> order,
                                   const HyperParams& hp, const TrialSeeds& seeds,
                                   std::size_t trial_id) {
  hp.validate();
  check_order(dataset, order);
  metrics::TrialLog log = start_log(order, hp, seeds, trial_id);
  for (std::size_t t = 1; t < order.size(); ++t) {
    const auto t0 = Clock::now();
    const auto known = known_after(order, t);
    metrics::TaskResult r = start_result(order, t);
    auto res = train_offline(dataset, known, hp.resolved_hidden_sizes(dataset.feature_dim), hp, seeds.model, seeds.shuffle);
    r.accuracy = res.accuracy;
    r.epochs = res.epochs;
    r.selected.assign(res.net.hidden_layer_count(), 0);
    r.neurons = res.net.hidden_widths();
    r.seconds = elapsed(t0, hp);
    log.final_parameters = res.net.parameter_count();
    log.tasks.push_back(std::move(r));
  }
  return log;
}

metrics::TrialLog run_baseline(Baseline which, const Dataset& dataset,
                               std::span<const CategoryId> order, const HyperParams& hp,
                               const TrialSeeds& seeds, std::size_t trial_id) {
  switch (which) {
    case Baseline::den: return run_trial(dataset, order, hp, seeds, trial_id);
    case Baseline::naive_finetune: return run_naive_finetune(dataset, order, hp, seeds, trial_id);
    case Baseline::full_offline: return run_full_offline(dataset, order, hp, seeds, trial_id);
  }
  throw ConfigError("unknown baseline");
}

}  // namespace openden::training
