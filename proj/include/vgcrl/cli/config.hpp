#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vgcrl/agent/sac.hpp"
#include "vgcrl/trainer/trainer.hpp"

namespace vgcrl::cli {

// Parsed key/value file: `[section]` headers, `key = value` lines, `#`
// comments. Keys are reported as "section.key" ("" section for top-level).
struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct KeyValues {
  std::map<std::string, ConfigEntry> entries;

  bool has(const std::string& key) const { return entries.count(key) > 0; }
  const ConfigEntry* find(const std::string& key) const {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  }
};

KeyValues parse_key_values(const std::string& text);

struct OutputConfig {
  std::string dir = "out/run";
  bool write_csv = true;
  bool write_json = true;
};

// Everything a run needs, resolved and validated. Unknown keys are rejected;
// defaults are filled and tracked so the echo can distinguish them from
// explicit settings.
struct ExperimentConfig {
  std::string name = "run";
  std::string env_type = "windy";  // windy | projected
  env::PointMassConfig env;
  post::PosteriorConfig posterior;
  // state_slice spelled as "positions": resolved against the env at build time.
  bool slice_positions = false;
  rl::SacConfig sac;
  rl::RelabelConfig relabel;
  train::TrainConfig train;
  std::vector<std::uint64_t> seeds = {0};
  OutputConfig output;
  std::optional<std::string> lgr_targets_file;
  std::vector<std::size_t> lgr_mask;

  std::set<std::string> explicit_keys;  // provenance of non-default values

  // Parses config text, expanding a `preset = name` reference first (later
  // keys override the preset's).
  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  // Fully explicit form; re-parsing it reproduces this config exactly.
  std::string resolved_text() const;
  // Human echo with "(default)" markers on untouched keys.
  std::string echo_text() const;

  void validate() const;
};

// Named experiment presets (the units of the acceptance studies).
std::vector<std::string> preset_names();
const std::string& preset_text(const std::string& name);
bool is_preset_name(const std::string& name);

// Component construction for one seed.
env::PointMassEnv build_env(const ExperimentConfig& config, std::uint64_t seed);
post::Prior build_prior(const ExperimentConfig& config);
std::unique_ptr<train::Trainer> build_trainer(const ExperimentConfig& config,
                                              std::uint64_t seed);

}  // namespace vgcrl::cli
