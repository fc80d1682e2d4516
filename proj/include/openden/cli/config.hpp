#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openden/cli/toml.hpp"
#include "openden/numerics/optimizer.hpp"
#include "openden/training/hyperparams.hpp"
#include "openden/training/protocol.hpp"

namespace openden::cli {

struct GridSpec {
  std::vector<std::size_t> layer1{512, 1024, 2048};
  std::vector<std::size_t> layer2{128, 256, 512};
  std::vector<numerics::OptimizerKind> optimizers{numerics::OptimizerKind::sgd, numerics::OptimizerKind::adam};

  std::size_t cell_count() const noexcept { return layer1.size() * layer2.size() * optimizers.size(); }
  void validate() const;
};

// Geometric steps from lo to hi inclusive, rounded: (512, 2048, 3) -> 512, 1024, 2048.
std::vector<std::size_t> geometric_steps(std::size_t lo, std::size_t hi, std::size_t steps);

struct RunConfig {
  // A manifest path or "synthetic:C,n,dim,sep[,seed]".
  std::string dataset;
  training::HyperParams hp;
  // Set when the learning rate was given explicitly; otherwise each
  // optimizer uses its own default.
  bool learning_rate_set = false;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::filesystem::path out = "openden_out";
  training::Baseline baseline = training::Baseline::den;
  std::size_t threads = 0;  // 0 = hardware concurrency
  GridSpec grid;

  // Checks every field that can be checked without loading data.
  void validate() const;
};

// Applies one "section.key" setting; unknown keys raise ConfigError.
void apply_setting(RunConfig& config, const std::string& section, const std::string& key,
                   const TomlValue& value, const std::string& where);

RunConfig config_from_toml(const TomlDocument& doc, const std::string& source);
RunConfig load_run_config(const std::filesystem::path& path);

// "section.key=value" with a TOML-syntax value, e.g. "hyperparams.mu=0.001".
void apply_override(RunConfig& config, const std::string& assignment);

// OPENDEN_THREADS if set (must be a positive integer), else `configured`, else
// the hardware concurrency; never less than 1.
std::size_t effective_threads(std::size_t configured);

// JSON object with every field of the config, for run manifests.
std::string config_json(const RunConfig& config);

}  // namespace openden::cli
