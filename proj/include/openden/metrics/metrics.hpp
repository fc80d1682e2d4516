#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "openden/data/dataset.hpp"
#include "openden/metrics/trial_log.hpp"
#include "openden/model/network.hpp"

namespace openden::metrics {

// Fraction of test instances of the `known` categories whose argmax logit
// equals their label, where known[i] is labelled i. Ties go to the lowest index.
double task_accuracy(const model::DenNetwork& net, const data::Dataset& dataset,
                     std::span<const CategoryId> known);

// Same, one value per entry of `known`.
std::vector<double> per_category_accuracy(const model::DenNetwork& net, const data::Dataset& dataset,
                                          std::span<const CategoryId> known);

// Mean of each trial's final A_t.
double compute_gca(std::span<const TrialLog> trials);
// Flat mean of A_t over every (trial, task) pair.
double compute_apa(std::span<const TrialLog> trials);
// Mean number of categories learned per trial; each count is capped at total_categories.
double compute_alc(std::span<const TrialLog> trials, std::size_t total_categories);

struct CurvePoint {
  std::size_t task = 0;
  std::size_t samples = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double seconds_mean = 0.0;
  double seconds_std = 0.0;
  std::vector<double> neurons_mean;  // per hidden layer
};

// Per-task aggregates across trials. Standard deviations are population (divide by n).
std::vector<CurvePoint> task_curves(std::span<const TrialLog> trials);

struct MetricsReport {
  std::string model = "den";
  double gca = 0.0;
  double apa = 0.0;
  double alc = 0.0;
  double parameters = 0.0;  // mean final parameter count, 0 when unknown
  std::size_t trials = 0;
  std::vector<CurvePoint> curves;
};

MetricsReport build_report(std::span<const TrialLog> trials, std::size_t total_categories,
                           const std::string& model_name);

std::string report_json(const MetricsReport& report);
// Model,GCA,APA,ALC,#Parameters with GCA/APA in percent.
std::string summary_csv(const MetricsReport& report);
std::string accuracy_curve_csv(std::span<const CurvePoint> curves);
std::string seconds_curve_csv(std::span<const CurvePoint> curves);
std::string neurons_curve_csv(std::span<const CurvePoint> curves);

}  // namespace openden::metrics
