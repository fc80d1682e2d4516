#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "openden/cli/commands.hpp"
#include "openden/error.hpp"
#include "openden/metrics/log_io.hpp"

namespace openden::cli {
namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  std::string baseline;
  std::string dataset;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_trials) {
  cmd->add_option("--config", f.config, "TOML run configuration");
  cmd->add_option("--seed", f.seed, "master seed");
  if (with_trials) {
    cmd->add_option("--trials", f.trials, "number of trials");
    cmd->add_option("--baseline", f.baseline, "den, naive_finetune or full_offline");
  }
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--dataset", f.dataset, "manifest path or synthetic:C,n,dim,sep[,seed]");
  cmd->add_option("--set", f.sets, "override a setting: section.key=value (repeatable)");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig config = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  for (const auto& s : f.sets) apply_override(config, s);
  if (f.seed) config.seed = *f.seed;
  if (f.trials) config.trials = *f.trials;
  if (!f.out.empty()) config.out = f.out;
  if (!f.baseline.empty()) config.baseline = training::parse_baseline(f.baseline);
  if (!f.dataset.empty()) config.dataset = f.dataset;
  return config;
}

void print_report(const metrics::MetricsReport& r) {
  std::printf("%s: trials=%zu GCA=%.1f%% APA=%.1f%% ALC=%s\n", r.model.c_str(), r.trials, r.gca * 100.0,
              r.apa * 100.0, metrics::format_real(r.alc).c_str());
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Open-ended category learning with a dynamically expandable classifier head"};
  app.require_subcommand(1);

  PrepOptions prep;
  auto* prep_cmd = app.add_subcommand("prep", "build a manifest and feature files from a category tree");
  prep_cmd->add_option("--input", prep.input_dir, "directory with one sub-directory per category")->required();
  prep_cmd->add_option("--output", prep.manifest, "manifest file to write")->required();
  prep_cmd->add_option("--extractor", prep.extractor, "identity or projection:<dim>:<seed>");
  prep_cmd->add_option("--test-fraction", prep.test_fraction, "test share when no split is given");
  prep_cmd->add_option("--seed", prep.seed, "split seed");

  CommonFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "run open-ended trials");
  add_common(train_cmd, train_flags, true);

  CommonFlags grid_flags;
  auto* grid_cmd = app.add_subcommand("grid", "offline grid search over fixed architectures");
  add_common(grid_cmd, grid_flags, false);

  std::string log_dir;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "aggregate trial logs into metrics and curve files");
  report_cmd->add_option("log_dir", log_dir, "directory with trial_*.csv")->required();
  report_cmd->add_option("--out", report_out, "where to write (defaults to the log directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::usage);
  }

  try {
    if (*prep_cmd) {
      const auto m = cmd_prep(prep);
      std::printf("wrote %s: %zu categories, feature_dim %zu\n", prep.manifest.string().c_str(),
                  m.categories.size(), m.feature_dim);
    } else if (*train_cmd) {
      const auto cfg = resolve(train_flags);
      const auto out = cmd_train(cfg);
      print_report(out.report);
      std::printf("logs in %s\n", cfg.out.string().c_str());
    } else if (*grid_cmd) {
      const auto cfg = resolve(grid_flags);
      const auto rows = cmd_grid(cfg);
      const auto& best = rows.front();
      std::printf("best: %zu x %zu %s accuracy %.4f (%zu cells, %s)\n", best.layer1, best.layer2,
                  numerics::to_string(best.optimizer), best.accuracy, rows.size(),
                  (cfg.out / "grid.csv").string().c_str());
    } else if (*report_cmd) {
      print_report(cmd_report(log_dir, report_out));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "openden: %s: %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "openden: error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace openden::cli
