#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "openden/cli/config.hpp"
#include "openden/data/dataset.hpp"
#include "openden/data/manifest.hpp"
#include "openden/metrics/metrics.hpp"
#include "openden/metrics/trial_log.hpp"

namespace openden::cli {

// Manifest path or synthetic spec. A synthetic spec without its own seed
// takes `fallback_seed`.
data::Dataset load_dataset(const std::string& spec, std::uint64_t fallback_seed);

struct PrepOptions {
  std::filesystem::path input_dir;
  std::filesystem::path manifest;
  std::string extractor = "identity";
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Input layout: one sub-directory per category (sorted by name -> ids
// 0..C-1), each holding either <instance>.fvec files or PGM views named
// <instance>_v<k>.pgm. Categories with train/ and test/ sub-directories keep
// that split; otherwise a seeded per-category split is drawn. View instances
// are merged and projected into feature files next to the manifest.
data::Manifest cmd_prep(const PrepOptions& options);

struct TrainOutput {
  std::vector<metrics::TrialLog> trials;
  metrics::MetricsReport report;
  std::size_t categories = 0;
};

// Runs config.trials trials and writes under config.out:
//   trial_NNN.csv, run_manifest.json, metrics.json, summary.csv,
//   curve_accuracy.csv, curve_seconds.csv, curve_neurons.csv
TrainOutput cmd_train(const RunConfig& config);

struct GridRow {
  std::size_t layer1 = 0;
  std::size_t layer2 = 0;
  numerics::OptimizerKind optimizer = numerics::OptimizerKind::sgd;
  double accuracy = 0.0;
  std::size_t parameters = 0;
  bool best = false;

  std::size_t neurons() const noexcept { return layer1 + layer2; }
};

// Higher accuracy first, then fewer neurons, then sgd before adam.
bool grid_before(const GridRow& a, const GridRow& b) noexcept;
// Sorts, marks the first row as best and returns the rows.
std::vector<GridRow> rank_grid(std::vector<GridRow> rows);
std::string grid_csv(const std::vector<GridRow>& rows);

// Offline training of every grid cell on all categories; writes grid.csv under config.out.
std::vector<GridRow> cmd_grid(const RunConfig& config);

// Aggregates trial_*.csv in `log_dir` into metrics.json, summary.csv and the
// curve files under `out_dir` (defaults to log_dir).
metrics::MetricsReport cmd_report(const std::filesystem::path& log_dir,
                                  const std::filesystem::path& out_dir = {});

// Entry point for the openden executable; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace openden::cli
