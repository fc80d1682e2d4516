#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "openden/data/dataset.hpp"
#include "openden/model/network.hpp"

namespace openden::metrics {

using data::CategoryId;

// Outcome of one task of an open-ended trial.
struct TaskResult {
  std::size_t task = 0;
  // Categories introduced by this task (two for task 1, one afterwards).
  std::vector<CategoryId> categories;
  // A_t on the held-out test split of all known categories, after expansion if any.
  double accuracy = 0.0;
  // A_t before the expansion round, when one ran.
  std::optional<double> accuracy_before_expansion;
  bool expanded = false;
  std::optional<model::ExpansionReport> expansion;
  bool degenerate_selection = false;
  std::vector<std::size_t> selected;  // |S| per hidden layer
  std::vector<std::size_t> neurons;   // hidden widths at the end of the task
  std::size_t epochs = 0;
  double seconds = 0.0;
};

struct TrialLog {
  std::size_t trial_id = 0;
  std::vector<TaskResult> tasks;
  std::vector<CategoryId> order;
  std::string hyperparam_fingerprint;
  std::uint64_t seed = 0;
  std::size_t final_parameters = 0;

  // Task 1 covers two categories, every later task one more.
  std::size_t categories_learned() const noexcept {
    return tasks.empty() ? 0 : tasks.size() + 1;
  }
};

}  // namespace openden::metrics
