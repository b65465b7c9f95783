// Experiment CLI: train presets/configs, evaluate checkpoints, list presets.

#include <iostream>

#include <CLI11.hpp>

#include "vgcrl/cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace vgcrl;

  CLI::App app{"variational goal-conditioned RL experiments"};
  app.require_subcommand(1);

  std::string config_arg;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool quiet = false;
  auto* train_cmd =
      app.add_subcommand("train", "run an experiment from a config file or preset name");
  train_cmd->add_option("config", config_arg, "config file path or preset name")->required();
  train_cmd->add_option("--seed", seed, "run a single seed instead of the config's list");
  train_cmd->add_flag("--force", force, "overwrite existing output directories");
  train_cmd->add_flag("--quiet", quiet, "suppress progress output");

  std::string checkpoint_arg, targets_arg;
  std::vector<std::size_t> mask;
  std::optional<std::size_t> horizon;
  auto* eval_cmd = app.add_subcommand("eval", "latent-goal-reaching report for a checkpoint");
  eval_cmd->add_option("checkpoint", checkpoint_arg, "checkpoint.json from a training run")
      ->required();
  eval_cmd->add_option("--targets", targets_arg, "target states file (one per line, CSV)")
      ->required();
  eval_cmd->add_option("--mask", mask, "observation dims to measure distance on")
      ->delimiter(',');
  eval_cmd->add_option("--horizon", horizon, "episode length (default: env horizon)");

  auto* presets_cmd = app.add_subcommand("presets", "preset utilities");
  auto* presets_list = presets_cmd->add_subcommand("list", "list available presets");
  std::string show_name;
  auto* presets_show = presets_cmd->add_subcommand("show", "print a preset's resolved config");
  presets_show->add_option("name", show_name, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      cli::ExperimentConfig config = cli::is_preset_name(config_arg)
                                         ? cli::ExperimentConfig::from_text(
                                               "preset = " + config_arg + "\n")
                                         : cli::ExperimentConfig::from_file(config_arg);
      cli::RunOptions options;
      options.seed_override = seed;
      options.force = force;
      options.quiet = quiet;
      return cli::run_train(config, options);
    }
    if (*eval_cmd) return cli::run_eval(checkpoint_arg, targets_arg, mask, horizon);
    if (*presets_list) {
      for (const std::string& name : cli::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (*presets_show) {
      cli::ExperimentConfig config =
          cli::ExperimentConfig::from_text("preset = " + show_name + "\n");
      std::cout << config.resolved_text();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
