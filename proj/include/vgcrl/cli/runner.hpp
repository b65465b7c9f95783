#pragma once

#include <filesystem>

#include "vgcrl/cli/config.hpp"

namespace vgcrl::cli {

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  bool force = false;
  bool quiet = false;
};

struct SeedRunResult {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  std::vector<metrics::MetricsRecord> records;
};

// Output root: output.dir, re-rooted under $VGCRL_OUT when that is set and
// the dir is relative.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

// CSV column set for a posterior family (stable schema: base columns plus
// disc_top1 for categorical or sigma_0.. for global-sigma Gaussian families).
std::vector<std::string> csv_columns(const post::PosteriorConfig& posterior);

std::string csv_row(const metrics::MetricsRecord& rec,
                    const std::vector<std::string>& columns);

nlohmann::json record_to_json(const metrics::MetricsRecord& rec);

// Trains one seed into dir/seed<k>/ (metrics.csv, metrics.json,
// checkpoint.json, resolved.cfg). Resumes from an existing checkpoint if one
// is present with a lower step counter and `resume` is set.
SeedRunResult run_seed(const ExperimentConfig& config, std::uint64_t seed,
                       const std::filesystem::path& outdir, bool quiet);

// Full `train` command over the config's seed list; writes per-seed outputs
// plus summary.csv/summary.json aggregates. Returns a process exit code.
int run_train(const ExperimentConfig& config, const RunOptions& options);

// `eval` command: LGR(s) of a stored checkpoint against a target-state file.
int run_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& targets,
             const std::vector<std::size_t>& mask, std::optional<std::size_t> horizon);

}  // namespace vgcrl::cli
