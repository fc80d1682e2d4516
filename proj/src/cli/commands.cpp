#include "openden/cli/commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "openden/data/features.hpp"
#include "openden/data/image.hpp"
#include "openden/data/manifest.hpp"
#include "openden/error.hpp"
#include "openden/metrics/log_io.hpp"
#include "openden/training/protocol.hpp"

namespace fs = std::filesystem;

namespace openden::cli {
namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::string trial_file(std::size_t trial_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%03zu.csv", trial_id);
  return buf;
}

// Runs job(i) for i in [0, n) on up to `threads` workers; rethrows the
// lowest-index failure after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::max<std::size_t>(1, std::min(threads, n));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_report_files(const fs::path& dir, const metrics::MetricsReport& report) {
  write_text(dir / "metrics.json", metrics::report_json(report));
  write_text(dir / "summary.csv", metrics::summary_csv(report));
  write_text(dir / "curve_accuracy.csv", metrics::accuracy_curve_csv(report.curves));
  write_text(dir / "curve_seconds.csv", metrics::seconds_curve_csv(report.curves));
  write_text(dir / "curve_neurons.csv", metrics::neurons_curve_csv(report.curves));
}

// ---- prep -----------------------------------------------------------------

struct Instance {
  std::string name;
  fs::path fvec;                  // when the instance is a feature file
  std::map<int, fs::path> views;  // view index -> PGM path
};

std::map<std::string, Instance> scan_instances(const fs::path& dir) {
  std::map<std::string, Instance> found;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const std::string ext = f.extension().string();
    if (ext == ".fvec") {
      auto& inst = found[stem];
      inst.name = stem;
      inst.fvec = f;
    } else if (ext == ".pgm") {
      const auto at = stem.rfind("_v");
      if (at == std::string::npos || at + 2 >= stem.size()) {
        throw DataError("prep: view file " + f.string() + " is not named <instance>_v<k>.pgm");
      }
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(stem.substr(at + 2), &used);
        if (used != stem.size() - at - 2 || k < 0) throw std::invalid_argument("k");
      } catch (const std::exception&) {
        throw DataError("prep: view file " + f.string() + " is not named <instance>_v<k>.pgm");
      }
      auto& inst = found[stem.substr(0, at)];
      inst.name = stem.substr(0, at);
      inst.views[k] = f;
    }
  }
  for (const auto& [name, inst] : found) {
    if (!inst.fvec.empty() && !inst.views.empty()) {
      throw DataError("prep: instance " + (dir / name).string() + " has both a feature file and views");
    }
  }
  return found;
}

// Views 0, 4, 8 of a 12-view capture (120 degrees apart at 30 degree
// spacing); views 0, 1, 2 of a 3-view instance.
std::array<int, 3> pick_views(const Instance& inst, const fs::path& where) {
  const bool twelve = inst.views.count(3) > 0;
  const std::array<int, 3> ids = twelve ? std::array<int, 3>{0, 4, 8} : std::array<int, 3>{0, 1, 2};
  for (int k : ids) {
    if (!inst.views.count(k)) {
      throw DataError("prep: instance " + (where / inst.name).string() + " lacks view _v" + std::to_string(k));
    }
  }
  return ids;
}

std::string portable(const fs::path& p) { return p.generic_string(); }

}  // namespace

data::Dataset load_dataset(const std::string& spec, std::uint64_t fallback_seed) {
  if (spec.rfind("synthetic:", 0) == 0) {
    auto s = data::parse_synthetic_spec(spec);
    if (!s.explicit_seed) s.seed = fallback_seed;
    return data::make_synthetic_stream(s);
  }
  return data::load_manifest(spec);
}

data::Manifest cmd_prep(const PrepOptions& options) {
  if (!fs::is_directory(options.input_dir)) {
    throw UsageError("prep: input directory " + options.input_dir.string() + " does not exist");
  }
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0)) {
    throw ConfigError("prep: test fraction must lie in (0, 1)");
  }
  const auto spec = data::ExtractorSpec::parse(options.extractor);
  const fs::path base = fs::absolute(options.manifest).parent_path();
  ensure_dir(base);

  std::vector<fs::path> cat_dirs;
  for (const auto& e : fs::directory_iterator(options.input_dir)) {
    if (e.is_directory()) cat_dirs.push_back(e.path());
  }
  std::sort(cat_dirs.begin(), cat_dirs.end());
  if (cat_dirs.size() < 2) throw DataError("prep: need at least 2 category directories");

  std::optional<data::FrozenExtractor> extractor;
  data::Manifest manifest;
  manifest.feature_dim = 0;

  auto feature_dim_of = [&](std::size_t dim, const fs::path& where) {
    if (manifest.feature_dim == 0) manifest.feature_dim = dim;
    if (dim != manifest.feature_dim) {
      throw DataError("prep: instance " + where.string() + " has dimension " + std::to_string(dim) +
                      ", expected " + std::to_string(manifest.feature_dim));
    }
  };

  auto emit = [&](const Instance& inst, const fs::path& src_dir, const fs::path& rel_out) -> std::string {
    if (!inst.fvec.empty()) {
      if (spec.kind != data::ExtractorKind::identity) {
        throw ConfigError("prep: projection extractors apply to view instances, not feature files");
      }
      feature_dim_of(data::read_fvec(inst.fvec).size(), inst.fvec);
      return portable(fs::absolute(inst.fvec).lexically_relative(base));
    }
    if (spec.kind != data::ExtractorKind::projection) {
      throw ConfigError("prep: view instances need a projection extractor (projection:<dim>:<seed>)");
    }
    if (!extractor) extractor = spec.build(0);
    const auto ids = pick_views(inst, src_dir);
    data::ViewTriplet triplet;
    for (int i = 0; i < 3; ++i) triplet.views[i] = data::read_pgm(inst.views.at(ids[i]));
    const auto features = extractor->extract(data::merge_views(triplet));
    feature_dim_of(features.size(), src_dir / inst.name);
    const fs::path out = base / rel_out;
    ensure_dir(out.parent_path());
    data::write_fvec(out, features);
    return portable(rel_out);
  };

  for (std::size_t c = 0; c < cat_dirs.size(); ++c) {
    const fs::path& dir = cat_dirs[c];
    data::ManifestCategory cat;
    cat.id = c;
    cat.name = dir.filename().string();
    const fs::path feat_root = fs::path("features") / cat.name;
    if (fs::is_directory(dir / "train") && fs::is_directory(dir / "test")) {
      for (const char* side : {"train", "test"}) {
        auto& list = std::string(side) == "train" ? cat.train : cat.test;
        for (const auto& [name, inst] : scan_instances(dir / side)) {
          list.push_back(emit(inst, dir / side, feat_root / side / (name + ".fvec")));
        }
      }
    } else {
      const auto found = scan_instances(dir);
      std::vector<std::string> names;
      for (const auto& [name, inst] : found) names.push_back(name);
      if (names.size() < 2) throw DataError("prep: category " + cat.name + " has fewer than 2 instances");
      std::mt19937_64 rng(training::derive_seed(options.seed, c, training::SeedPurpose::order));
      std::vector<std::string> shuffled = names;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto n = static_cast<long long>(names.size());
      const auto n_test = std::clamp(std::llround(static_cast<double>(n) * options.test_fraction), 1LL, n - 1);
      std::set<std::string> test(shuffled.begin(), shuffled.begin() + n_test);
      for (const auto& name : names) {
        auto& list = test.count(name) ? cat.test : cat.train;
        list.push_back(emit(found.at(name), dir, feat_root / (name + ".fvec")));
      }
    }
    if (cat.train.empty() || cat.test.empty()) {
      throw DataError("prep: category " + cat.name + " needs both train and test instances");
    }
    manifest.categories.push_back(std::move(cat));
  }
  data::write_manifest(options.manifest, manifest);
  return manifest;
}

TrainOutput cmd_train(const RunConfig& config) {
  config.validate();
  const std::size_t threads = effective_threads(config.threads);
  ensure_dir(config.out);
  const data::Dataset dataset = load_dataset(config.dataset, config.seed);
  const std::size_t C = dataset.category_count();
  if (C < 2) throw DataError("dataset needs at least 2 categories");

  std::vector<std::optional<metrics::TrialLog>> logs(config.trials);
  std::vector<training::TrialSeeds> seeds(config.trials);
  std::vector<std::vector<std::size_t>> orders(config.trials);
  for (std::size_t i = 0; i < config.trials; ++i) {
    seeds[i] = training::TrialSeeds::derive(config.seed, i + 1);
    orders[i] = training::category_order(C, seeds[i].order);
  }
  parallel_for(config.trials, threads, [&](std::size_t i) {
    try {
      logs[i] = training::run_baseline(config.baseline, dataset, orders[i], config.hp, seeds[i], i + 1);
    } catch (const std::exception& e) {
      std::string name = trial_file(i + 1);
      name.replace(name.size() - 4, 4, ".error.txt");
      write_text(config.out / name,
                 std::string("trial ") + std::to_string(i + 1) + " aborted: " + e.what() + "\n");
      throw;
    }
  });

  TrainOutput out;
  out.categories = C;
  for (auto& l : logs) out.trials.push_back(std::move(*l));
  for (const auto& log : out.trials) metrics::write_trial_csv(config.out / trial_file(log.trial_id), log);

  nlohmann::ordered_json manifest = nlohmann::ordered_json::parse(config_json(config));
  manifest["dataset_descriptor"] = dataset.descriptor;
  manifest["categories"] = C;
  manifest["feature_dim"] = dataset.feature_dim;
  manifest["initial_hidden_sizes"] = config.hp.resolved_hidden_sizes(dataset.feature_dim);
  auto trials = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < out.trials.size(); ++i) {
    const auto& log = out.trials[i];
    trials.push_back({{"trial_id", log.trial_id},
                      {"file", trial_file(log.trial_id)},
                      {"order", log.order},
                      {"seeds",
                       {{"order", seeds[i].order},
                        {"sampler", seeds[i].sampler},
                        {"model", seeds[i].model},
                        {"shuffle", seeds[i].shuffle}}},
                      {"final_parameters", log.final_parameters},
                      {"fingerprint", log.hyperparam_fingerprint}});
  }
  manifest["trial_runs"] = trials;
  write_text(config.out / "run_manifest.json", manifest.dump(2) + "\n");

  out.report = metrics::build_report(out.trials, C, training::to_string(config.baseline));
  write_report_files(config.out, out.report);
  return out;
}

bool grid_before(const GridRow& a, const GridRow& b) noexcept {
  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
  if (a.neurons() != b.neurons()) return a.neurons() < b.neurons();
  if (a.optimizer != b.optimizer) return a.optimizer == numerics::OptimizerKind::sgd;
  if (a.layer1 != b.layer1) return a.layer1 < b.layer1;
  return a.layer2 < b.layer2;
}

std::vector<GridRow> rank_grid(std::vector<GridRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), grid_before);
  for (auto& r : rows) r.best = false;
  if (!rows.empty()) rows.front().best = true;
  return rows;
}

std::string grid_csv(const std::vector<GridRow>& rows) {
  std::ostringstream out;
  out << "rank,layer1,layer2,optimizer,accuracy,neurons,parameters,best\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << (i + 1) << ',' << r.layer1 << ',' << r.layer2 << ',' << numerics::to_string(r.optimizer) << ','
        << metrics::format_real(r.accuracy) << ',' << r.neurons() << ',' << r.parameters << ','
        << (r.best ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<GridRow> cmd_grid(const RunConfig& config) {
  config.hp.validate();
  config.grid.validate();
  if (config.dataset.empty()) throw ConfigError("run.dataset is not set (use --dataset or [run] dataset)");
  const std::size_t threads = effective_threads(config.threads);
  ensure_dir(config.out);
  const data::Dataset dataset = load_dataset(config.dataset, config.seed);
  std::vector<std::size_t> all(dataset.category_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::vector<GridRow> rows;
  for (auto l1 : config.grid.layer1) {
    for (auto l2 : config.grid.layer2) {
      for (auto opt : config.grid.optimizers) rows.push_back({l1, l2, opt, 0.0, 0, false});
    }
  }
  const auto seeds = training::TrialSeeds::derive(config.seed, 0);
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    auto& row = rows[i];
    training::HyperParams hp = config.hp;
    hp.optimizer.kind = row.optimizer;
    if (!config.learning_rate_set) {
      hp.optimizer.learning_rate = numerics::OptimizerSettings::default_learning_rate(row.optimizer);
    }
    const std::vector<std::size_t> hidden{row.layer1, row.layer2};
    const auto res = training::train_offline(dataset, all, hidden, hp, seeds.model, seeds.shuffle);
    row.accuracy = res.accuracy;
    row.parameters = res.net.parameter_count();
  });
  rows = rank_grid(std::move(rows));
  write_text(config.out / "grid.csv", grid_csv(rows));
  return rows;
}

metrics::MetricsReport cmd_report(const fs::path& log_dir, const fs::path& out_dir) {
  auto trials = metrics::read_trial_dir(log_dir);
  std::string model = "den";
  std::size_t total = 0;
  const fs::path manifest_path = log_dir / "run_manifest.json";
  if (fs::exists(manifest_path)) {
    try {
      const auto doc = nlohmann::json::parse(read_text(manifest_path));
      model = doc.value("baseline", model);
      total = doc.value("categories", std::size_t{0});
      std::map<std::size_t, std::size_t> params;
      for (const auto& t : doc.value("trial_runs", nlohmann::json::array())) {
        params[t.at("trial_id").get<std::size_t>()] = t.value("final_parameters", std::size_t{0});
      }
      for (auto& t : trials) {
        if (auto it = params.find(t.trial_id); it != params.end()) t.final_parameters = it->second;
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(manifest_path.string() + ": " + e.what());
    }
  }
  if (total == 0) {
    for (const auto& t : trials) total = std::max(total, t.categories_learned());
  }
  const fs::path dest = out_dir.empty() ? log_dir : out_dir;
  ensure_dir(dest);
  auto report = metrics::build_report(trials, total, model);
  write_report_files(dest, report);
  return report;
}

}  // namespace openden::cli
