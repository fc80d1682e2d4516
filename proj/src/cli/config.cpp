#include "openden/cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "openden/error.hpp"

namespace openden::cli {
namespace {

[[noreturn]] void bad(const std::string& where, const std::string& key, const std::string& what) {
  throw ConfigError(where + ": " + key + " " + what);
}

double as_real(const TomlValue& v, const std::string& where, const std::string& key) {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  bad(where, key, "must be a number");
}

std::uint64_t as_unsigned(const TomlValue& v, const std::string& where, const std::string& key) {
  auto* i = std::get_if<std::int64_t>(&v);
  if (!i || *i < 0) bad(where, key, "must be a non-negative integer");
  return static_cast<std::uint64_t>(*i);
}

bool as_bool(const TomlValue& v, const std::string& where, const std::string& key) {
  auto* b = std::get_if<bool>(&v);
  if (!b) bad(where, key, "must be true or false");
  return *b;
}

std::string as_string(const TomlValue& v, const std::string& where, const std::string& key) {
  auto* s = std::get_if<std::string>(&v);
  if (!s) bad(where, key, "must be a string");
  return *s;
}

std::vector<std::size_t> as_sizes(const TomlValue& v, const std::string& where, const std::string& key) {
  auto* arr = std::get_if<TomlArray>(&v);
  if (!arr) bad(where, key, "must be an array of integers");
  std::vector<std::size_t> out;
  for (const auto& e : *arr) {
    auto* i = std::get_if<std::int64_t>(&e);
    if (!i || *i <= 0) bad(where, key, "entries must be positive integers");
    out.push_back(static_cast<std::size_t>(*i));
  }
  return out;
}

std::vector<std::string> as_strings(const TomlValue& v, const std::string& where, const std::string& key) {
  auto* arr = std::get_if<TomlArray>(&v);
  if (!arr) bad(where, key, "must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : *arr) {
    auto* s = std::get_if<std::string>(&e);
    if (!s) bad(where, key, "entries must be strings");
    out.push_back(*s);
  }
  return out;
}

struct GridSteps {
  std::optional<std::size_t> layer1;
  std::optional<std::size_t> layer2;
};

void apply_grid_steps(RunConfig& config, const GridSteps& steps, const std::string& where) {
  auto expand = [&](std::vector<std::size_t>& sizes, std::optional<std::size_t> n, const char* key) {
    if (!n) return;
    if (sizes.size() != 2) bad(where, key, "needs a [min, max] pair when a step count is given");
    if (sizes[0] > sizes[1]) bad(where, key, "range must satisfy min <= max");
    sizes = geometric_steps(sizes[0], sizes[1], *n);
  };
  expand(config.grid.layer1, steps.layer1, "grid.layer1");
  expand(config.grid.layer2, steps.layer2, "grid.layer2");
}

void apply_with_steps(RunConfig& config, const std::string& section, const std::string& key,
                      const TomlValue& value, const std::string& where, GridSteps& steps) {
  if (section == "grid" && key == "layer1_steps") {
    steps.layer1 = as_unsigned(value, where, "grid.layer1_steps");
  } else if (section == "grid" && key == "layer2_steps") {
    steps.layer2 = as_unsigned(value, where, "grid.layer2_steps");
  } else {
    apply_setting(config, section, key, value, where);
  }
}

}  // namespace

void GridSpec::validate() const {
  if (layer1.empty() || layer2.empty() || optimizers.empty()) {
    throw ConfigError("grid: layer1, layer2 and optimizers must be non-empty");
  }
  for (auto w : layer1) {
    if (w == 0) throw ConfigError("grid: layer sizes must be >= 1");
  }
  for (auto w : layer2) {
    if (w == 0) throw ConfigError("grid: layer sizes must be >= 1");
  }
}

std::vector<std::size_t> geometric_steps(std::size_t lo, std::size_t hi, std::size_t steps) {
  if (lo == 0 || lo > hi) throw ConfigError("grid range must satisfy 1 <= min <= max");
  if (steps == 0) throw ConfigError("grid step count must be >= 1");
  if (steps == 1) return {lo};
  std::vector<std::size_t> out;
  const double ratio = static_cast<double>(hi) / static_cast<double>(lo);
  for (std::size_t i = 0; i < steps; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(steps - 1);
    const auto v = static_cast<std::size_t>(std::llround(static_cast<double>(lo) * std::pow(ratio, f)));
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

void RunConfig::validate() const {
  hp.validate();
  if (trials < 1) throw ConfigError("run.trials must be >= 1");
  if (dataset.empty()) throw ConfigError("run.dataset is not set (use --dataset or [run] dataset)");
  grid.validate();
}

void apply_setting(RunConfig& config, const std::string& section, const std::string& key,
                   const TomlValue& value, const std::string& where) {
  auto& hp = config.hp;
  const std::string name = section + "." + key;
  if (section == "hyperparams") {
    if (key == "mu") hp.mu = as_real(value, where, name);
    else if (key == "lambda_drift") hp.lambda_drift = as_real(value, where, name);
    else if (key == "rho") hp.rho = as_unsigned(value, where, name);
    else if (key == "tau") hp.tau = as_real(value, where, name);
    else if (key == "k") hp.k = as_unsigned(value, where, name);
    else if (key == "epsilon_prune") hp.epsilon_prune = as_real(value, where, name);
    else if (key == "zero_threshold") hp.zero_threshold = as_real(value, where, name);
    else if (key == "epochs_per_stage") hp.epochs_per_stage = as_unsigned(value, where, name);
    else if (key == "batch_size") hp.batch_size = as_unsigned(value, where, name);
    else if (key == "optimizer") {
      hp.optimizer.kind = numerics::parse_optimizer_kind(as_string(value, where, name));
      if (!config.learning_rate_set) {
        hp.optimizer.learning_rate = numerics::OptimizerSettings::default_learning_rate(hp.optimizer.kind);
      }
    } else if (key == "learning_rate") {
      hp.optimizer.learning_rate = as_real(value, where, name);
      config.learning_rate_set = true;
    } else if (key == "beta1") hp.optimizer.beta1 = as_real(value, where, name);
    else if (key == "beta2") hp.optimizer.beta2 = as_real(value, where, name);
    else if (key == "adam_epsilon") hp.optimizer.epsilon = as_real(value, where, name);
    else if (key == "hidden_sizes") hp.hidden_sizes = as_sizes(value, where, name);
    else if (key == "verify_freeze") hp.verify_freeze = as_bool(value, where, name);
    else bad(where, name, "is not a known setting");
  } else if (section == "run") {
    if (key == "dataset") config.dataset = as_string(value, where, name);
    else if (key == "trials") config.trials = as_unsigned(value, where, name);
    else if (key == "seed") config.seed = as_unsigned(value, where, name);
    else if (key == "out") config.out = as_string(value, where, name);
    else if (key == "baseline") config.baseline = training::parse_baseline(as_string(value, where, name));
    else if (key == "threads") config.threads = as_unsigned(value, where, name);
    else if (key == "log_wall_time") hp.log_wall_time = as_bool(value, where, name);
    else bad(where, name, "is not a known setting");
  } else if (section == "expansion") {
    if (key == "connect_all_outputs") hp.connect_all_outputs = as_bool(value, where, name);
    else bad(where, name, "is not a known setting");
  } else if (section == "grid") {
    if (key == "layer1") config.grid.layer1 = as_sizes(value, where, name);
    else if (key == "layer2") config.grid.layer2 = as_sizes(value, where, name);
    else if (key == "optimizers") {
      config.grid.optimizers.clear();
      for (const auto& s : as_strings(value, where, name)) {
        config.grid.optimizers.push_back(numerics::parse_optimizer_kind(s));
      }
    } else bad(where, name, "is not a known setting");
  } else {
    throw ConfigError(where + ": unknown section [" + section + "]");
  }
}

RunConfig config_from_toml(const TomlDocument& doc, const std::string& source) {
  RunConfig config;
  GridSteps steps;
  // Optimizer before learning_rate so an explicit rate is never replaced by a default.
  if (auto s = doc.find("hyperparams"); s != doc.end()) {
    if (auto e = s->second.find("optimizer"); e != s->second.end()) {
      apply_setting(config, "hyperparams", "optimizer", e->second.value,
                    source + ":" + std::to_string(e->second.line));
    }
  }
  for (const auto& [section, table] : doc) {
    if (section.empty() && !table.empty()) {
      throw ConfigError(source + ":" + std::to_string(table.begin()->second.line) +
                        ": settings must live under a [section]");
    }
    for (const auto& [key, entry] : table) {
      if (section == "hyperparams" && key == "optimizer") continue;
      apply_with_steps(config, section, key, entry.value, source + ":" + std::to_string(entry.line), steps);
    }
  }
  apply_grid_steps(config, steps, source);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_toml(parse_toml(ss.str(), path.string()), path.string());
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  std::string value = assignment.substr(eq + 1);
  // Let bare words act as strings: --set run.baseline=den
  const auto doc = [&] {
    try {
      return parse_toml("v = " + value, "--set " + section + "." + key);
    } catch (const ConfigError&) {
      return parse_toml("v = \"" + value + "\"", "--set " + section + "." + key);
    }
  }();
  apply_setting(config, section, key, doc.at("").at("v").value, "--set");
}

std::size_t effective_threads(std::size_t configured) {
  if (const char* env = std::getenv("OPENDEN_THREADS"); env && *env) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("OPENDEN_THREADS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  if (configured > 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string config_json(const RunConfig& config) {
  const auto& hp = config.hp;
  nlohmann::ordered_json h;
  h["mu"] = hp.mu;
  h["lambda_drift"] = hp.lambda_drift;
  h["rho"] = hp.rho;
  h["tau"] = hp.tau;
  h["k"] = hp.k;
  h["epsilon_prune"] = hp.epsilon_prune;
  h["zero_threshold"] = hp.zero_threshold;
  h["epochs_per_stage"] = hp.epochs_per_stage;
  h["batch_size"] = hp.batch_size;
  h["optimizer"] = numerics::to_string(hp.optimizer.kind);
  h["learning_rate"] = hp.optimizer.learning_rate;
  h["beta1"] = hp.optimizer.beta1;
  h["beta2"] = hp.optimizer.beta2;
  h["adam_epsilon"] = hp.optimizer.epsilon;
  h["hidden_sizes"] = hp.hidden_sizes;
  h["connect_all_outputs"] = hp.connect_all_outputs;
  h["verify_freeze"] = hp.verify_freeze;
  h["log_wall_time"] = hp.log_wall_time;
  nlohmann::ordered_json doc;
  doc["dataset"] = config.dataset;
  doc["trials"] = config.trials;
  doc["seed"] = config.seed;
  doc["baseline"] = training::to_string(config.baseline);
  doc["hyperparams"] = h;
  doc["fingerprint"] = hp.fingerprint();
  return doc.dump(2);
}

}  // namespace openden::cli
