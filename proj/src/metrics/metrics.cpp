#include "openden/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"
#include "openden/error.hpp"
#include "openden/metrics/log_io.hpp"
#include "openden/model/gradients.hpp"

namespace openden::metrics {
namespace {

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;
};

Tally tally_category(const model::DenNetwork& net, const data::Matrix& test, std::size_t label) {
  Tally t;
  if (test.rows() == 0) return t;
  const auto cache = model::forward_batch(net, test);
  const auto& logits = cache.activations.back();
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    auto row = logits.row(b);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == label) ++t.correct;
    ++t.total;
  }
  return t;
}

void check_known(const data::Dataset& dataset, std::span<const CategoryId> known) {
  if (known.empty()) throw DataError("task_accuracy: no known categories");
  for (CategoryId c : known) {
    if (c >= dataset.category_count()) {
      throw IndexError("task_accuracy: category " + std::to_string(c) + " not in dataset");
    }
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

void require_trials(std::span<const TrialLog> trials, const char* what) {
  if (trials.empty()) throw UsageError(std::string(what) + ": no trials given");
  for (const auto& t : trials) {
    if (t.tasks.empty()) {
      throw UsageError(std::string(what) + ": trial " + std::to_string(t.trial_id) + " has no tasks");
    }
  }
}

}  // namespace

double task_accuracy(const model::DenNetwork& net, const data::Dataset& dataset,
                     std::span<const CategoryId> known) {
  check_known(dataset, known);
  Tally all;
  for (std::size_t i = 0; i < known.size(); ++i) {
    const Tally t = tally_category(net, dataset.categories[known[i]].test, i);
    all.correct += t.correct;
    all.total += t.total;
  }
  if (all.total == 0) throw DataError("task_accuracy: the known categories have no test instances");
  return static_cast<double>(all.correct) / static_cast<double>(all.total);
}

std::vector<double> per_category_accuracy(const model::DenNetwork& net, const data::Dataset& dataset,
                                          std::span<const CategoryId> known) {
  check_known(dataset, known);
  std::vector<double> out;
  for (std::size_t i = 0; i < known.size(); ++i) {
    const Tally t = tally_category(net, dataset.categories[known[i]].test, i);
    if (t.total == 0) {
      throw DataError("per_category_accuracy: category " + std::to_string(known[i]) +
                      " has no test instances");
    }
    out.push_back(static_cast<double>(t.correct) / static_cast<double>(t.total));
  }
  return out;
}

double compute_gca(std::span<const TrialLog> trials) {
  require_trials(trials, "compute_gca");
  double s = 0.0;
  for (const auto& t : trials) s += t.tasks.back().accuracy;
  return s / static_cast<double>(trials.size());
}

double compute_apa(std::span<const TrialLog> trials) {
  require_trials(trials, "compute_apa");
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& t : trials) {
    for (const auto& task : t.tasks) {
      s += task.accuracy;
      ++n;
    }
  }
  return s / static_cast<double>(n);
}

double compute_alc(std::span<const TrialLog> trials, std::size_t total_categories) {
  require_trials(trials, "compute_alc");
  double s = 0.0;
  for (const auto& t : trials) {
    s += static_cast<double>(std::min(t.categories_learned(), total_categories));
  }
  return s / static_cast<double>(trials.size());
}

std::vector<CurvePoint> task_curves(std::span<const TrialLog> trials) {
  std::map<std::size_t, std::vector<const TaskResult*>> by_task;
  for (const auto& trial : trials) {
    for (const auto& task : trial.tasks) by_task[task.task].push_back(&task);
  }
  std::vector<CurvePoint> out;
  for (const auto& [t, rows] : by_task) {
    CurvePoint p;
    p.task = t;
    p.samples = rows.size();
    std::vector<double> acc;
    std::vector<double> secs;
    std::size_t layers = 0;
    for (const auto* r : rows) {
      acc.push_back(r->accuracy);
      secs.push_back(r->seconds);
      layers = std::max(layers, r->neurons.size());
    }
    p.accuracy_mean = mean_of(acc);
    p.accuracy_std = population_std(acc, p.accuracy_mean);
    p.seconds_mean = mean_of(secs);
    p.seconds_std = population_std(secs, p.seconds_mean);
    p.neurons_mean.assign(layers, 0.0);
    for (std::size_t l = 0; l < layers; ++l) {
      double s = 0.0;
      for (const auto* r : rows) s += l < r->neurons.size() ? static_cast<double>(r->neurons[l]) : 0.0;
      p.neurons_mean[l] = s / static_cast<double>(rows.size());
    }
    out.push_back(std::move(p));
  }
  return out;
}

MetricsReport build_report(std::span<const TrialLog> trials, std::size_t total_categories,
                           const std::string& model_name) {
  MetricsReport r;
  r.model = model_name;
  r.gca = compute_gca(trials);
  r.apa = compute_apa(trials);
  r.alc = compute_alc(trials, total_categories);
  r.trials = trials.size();
  double params = 0.0;
  for (const auto& t : trials) params += static_cast<double>(t.final_parameters);
  r.parameters = params / static_cast<double>(trials.size());
  r.curves = task_curves(trials);
  return r;
}

std::string report_json(const MetricsReport& report) {
  nlohmann::ordered_json doc;
  doc["model"] = report.model;
  doc["trials"] = report.trials;
  doc["gca"] = report.gca;
  doc["apa"] = report.apa;
  doc["alc"] = report.alc;
  doc["parameters"] = report.parameters;
  auto acc = nlohmann::ordered_json::array();
  auto neurons = nlohmann::ordered_json::array();
  for (const auto& p : report.curves) {
    acc.push_back({{"t", p.task}, {"mean", p.accuracy_mean}, {"std", p.accuracy_std}, {"n", p.samples}});
    neurons.push_back({{"t", p.task}, {"mean_per_layer", p.neurons_mean}});
  }
  doc["accuracy_curve"] = acc;
  doc["neuron_curve"] = neurons;
  return doc.dump(2) + "\n";
}

std::string summary_csv(const MetricsReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.1f,%.1f,%s,%.0f\n", report.model.c_str(), report.gca * 100.0,
                report.apa * 100.0, format_real(report.alc).c_str(), report.parameters);
  return std::string("Model,GCA,APA,ALC,#Parameters\n") + buf;
}

std::string accuracy_curve_csv(std::span<const CurvePoint> curves) {
  std::ostringstream out;
  out << "t,n,accuracy_mean,accuracy_std\n";
  for (const auto& p : curves) {
    out << p.task << ',' << p.samples << ',' << format_real(p.accuracy_mean) << ','
        << format_real(p.accuracy_std) << '\n';
  }
  return out.str();
}

std::string seconds_curve_csv(std::span<const CurvePoint> curves) {
  std::ostringstream out;
  out << "t,n,seconds_mean,seconds_std\n";
  for (const auto& p : curves) {
    out << p.task << ',' << p.samples << ',' << format_real(p.seconds_mean) << ','
        << format_real(p.seconds_std) << '\n';
  }
  return out.str();
}

std::string neurons_curve_csv(std::span<const CurvePoint> curves) {
  std::size_t layers = 0;
  for (const auto& p : curves) layers = std::max(layers, p.neurons_mean.size());
  std::ostringstream out;
  out << "t,n";
  for (std::size_t l = 0; l < layers; ++l) out << ",neurons_l" << (l + 1) << "_mean";
  out << ",neurons_total_mean\n";
  for (const auto& p : curves) {
    out << p.task << ',' << p.samples;
    double total = 0.0;
    for (std::size_t l = 0; l < layers; ++l) {
      const double v = l < p.neurons_mean.size() ? p.neurons_mean[l] : 0.0;
      total += v;
      out << ',' << format_real(v);
    }
    out << ',' << format_real(total) << '\n';
  }
  return out.str();
}

}  // namespace openden::metrics
