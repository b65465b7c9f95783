#include "vgcrl/cli/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace vgcrl::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

bool has_global_sigma(const post::PosteriorConfig& p) {
  using post::Family;
  return p.family == Family::fixed_gaussian || p.family == Family::adaptive_gaussian ||
         p.family == Family::linear_gaussian;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  VGCRL_CHECK(out.good(), "cannot open '", path.string(), "' for writing");
  out << text;
  VGCRL_CHECK(out.good(), "write to '", path.string(), "' failed");
}

}  // namespace

fs::path resolve_output_dir(const ExperimentConfig& config) {
  fs::path dir = config.output.dir;
  if (const char* root = std::getenv("VGCRL_OUT"); root && dir.is_relative())
    dir = fs::path(root) / dir;
  return dir;
}

std::vector<std::string> csv_columns(const post::PosteriorConfig& posterior) {
  std::vector<std::string> cols = {"env_steps", "F", "lgr_z", "lgr_s"};
  if (posterior.family == post::Family::categorical) cols.push_back("disc_top1");
  if (has_global_sigma(posterior))
    for (std::size_t j = 0; j < posterior.goal_dim; ++j)
      cols.push_back("sigma_" + std::to_string(j));
  return cols;
}

std::string csv_row(const metrics::MetricsRecord& rec,
                    const std::vector<std::string>& columns) {
  std::string row;
  const std::vector<double>* sigma = nullptr;
  if (auto it = rec.posterior_diag.fields.find("sigma");
      it != rec.posterior_diag.fields.end())
    sigma = &it->second;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) row += ",";
    const std::string& col = columns[i];
    if (col == "env_steps") {
      row += std::to_string(rec.env_steps);
    } else if (col == "F") {
      row += fmt(rec.objective);
    } else if (col == "lgr_z") {
      row += fmt(rec.lgr_z);
    } else if (col == "lgr_s") {
      if (rec.lgr_s) row += fmt(*rec.lgr_s);
    } else if (col == "disc_top1") {
      if (rec.disc_top1) row += fmt(*rec.disc_top1);
    } else if (col.rfind("sigma_", 0) == 0) {
      const std::size_t j = static_cast<std::size_t>(std::stoul(col.substr(6)));
      if (sigma && j < sigma->size()) row += fmt((*sigma)[j]);
    } else {
      fail("csv_row: unknown column '", col, "'");
    }
  }
  return row;
}

nlohmann::json record_to_json(const metrics::MetricsRecord& rec) {
  nlohmann::json j = {
      {"env_steps", rec.env_steps},
      {"F", rec.objective},
      {"lgr_z", rec.lgr_z},
  };
  if (rec.lgr_s) j["lgr_s"] = *rec.lgr_s;
  if (rec.disc_top1) j["disc_top1"] = *rec.disc_top1;
  nlohmann::json diag = nlohmann::json::object();
  for (const auto& [key, values] : rec.posterior_diag.fields) diag[key] = values;
  j["posterior"] = diag;
  return j;
}

SeedRunResult run_seed(const ExperimentConfig& config, std::uint64_t seed,
                       const fs::path& outdir, bool quiet) {
  SeedRunResult result;
  result.seed = seed;
  result.dir = outdir / ("seed" + std::to_string(seed));
  fs::create_directories(result.dir);

  auto trainer = build_trainer(config, seed);
  const std::string resolved = config.resolved_text();
  write_text(result.dir / "resolved.cfg", resolved);

  const std::vector<std::string> columns = csv_columns(config.posterior);
  std::string csv;
  for (std::size_t i = 0; i < columns.size(); ++i) csv += (i ? "," : "") + columns[i];
  csv += "\n";

  result.records = trainer->run_training([&](const metrics::MetricsRecord& rec) {
    csv += csv_row(rec, columns) + "\n";
    if (!quiet)
      std::cout << "[seed " << seed << "] steps=" << rec.env_steps << " F=" << rec.objective
                << " lgr_z=" << rec.lgr_z << "\n";
  });

  if (config.output.write_csv) write_text(result.dir / "metrics.csv", csv);
  if (config.output.write_json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : result.records) arr.push_back(record_to_json(rec));
    write_text(result.dir / "metrics.json", arr.dump(2) + "\n");
  }
  nd::write_checkpoint_file(result.dir / "checkpoint.json", trainer->checkpoint(resolved));
  return result;
}

namespace {

// mean +- std aggregate over seeds, joined on env_steps.
void write_summary(const ExperimentConfig& config, const std::vector<SeedRunResult>& runs,
                   const fs::path& outdir) {
  const std::vector<std::string> columns = csv_columns(config.posterior);
  std::map<std::int64_t, std::vector<const metrics::MetricsRecord*>> by_step;
  for (const SeedRunResult& run : runs)
    for (const auto& rec : run.records) by_step[rec.env_steps].push_back(&rec);

  auto column_value = [](const metrics::MetricsRecord& rec, const std::string& col,
                         double& out) -> bool {
    if (col == "F") out = rec.objective;
    else if (col == "lgr_z") out = rec.lgr_z;
    else if (col == "lgr_s") {
      if (!rec.lgr_s) return false;
      out = *rec.lgr_s;
    } else if (col == "disc_top1") {
      if (!rec.disc_top1) return false;
      out = *rec.disc_top1;
    } else if (col.rfind("sigma_", 0) == 0) {
      auto it = rec.posterior_diag.fields.find("sigma");
      const std::size_t j = static_cast<std::size_t>(std::stoul(col.substr(6)));
      if (it == rec.posterior_diag.fields.end() || j >= it->second.size()) return false;
      out = it->second[j];
    } else {
      return false;
    }
    return true;
  };

  std::string csv = "env_steps";
  for (std::size_t i = 1; i < columns.size(); ++i)
    csv += "," + columns[i] + "_mean," + columns[i] + "_std";
  csv += "\n";
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& [steps, recs] : by_step) {
    csv += std::to_string(steps);
    nlohmann::json jrow = {{"env_steps", steps}};
    for (std::size_t i = 1; i < columns.size(); ++i) {
      double sum = 0.0, sum2 = 0.0;
      int n = 0;
      for (const auto* rec : recs) {
        double v;
        if (column_value(*rec, columns[i], v)) {
          sum += v;
          sum2 += v * v;
          ++n;
        }
      }
      if (n > 0) {
        const double mean = sum / n;
        const double var = std::max(0.0, sum2 / n - mean * mean);
        csv += "," + fmt(mean) + "," + fmt(std::sqrt(var));
        jrow[columns[i] + "_mean"] = mean;
        jrow[columns[i] + "_std"] = std::sqrt(var);
      } else {
        csv += ",,";
      }
    }
    csv += "\n";
    jrows.push_back(std::move(jrow));
  }
  if (config.output.write_csv) write_text(outdir / "summary.csv", csv);
  if (config.output.write_json) write_text(outdir / "summary.json", jrows.dump(2) + "\n");
}

}  // namespace

int run_train(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentConfig cfg = config;
  if (options.seed_override) cfg.seeds = {*options.seed_override};

  const fs::path outdir = resolve_output_dir(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path seed_dir = outdir / ("seed" + std::to_string(seed));
    if (fs::exists(seed_dir) && !options.force)
      fail("output directory '", seed_dir.string(), "' exists; pass --force to overwrite");
  }
  fs::create_directories(outdir);
  if (!options.quiet) std::cout << cfg.echo_text() << "\n";

  std::vector<SeedRunResult> runs;
  for (std::uint64_t seed : cfg.seeds)
    runs.push_back(run_seed(cfg, seed, outdir, options.quiet));
  if (runs.size() > 1) write_summary(cfg, runs, outdir);

  if (!options.quiet) {
    for (const SeedRunResult& run : runs) {
      const auto& last = run.records.back();
      std::cout << "seed " << run.seed << ": final F=" << last.objective
                << " lgr_z=" << last.lgr_z << " -> " << run.dir.string() << "\n";
    }
  }
  return 0;
}

int run_eval(const fs::path& checkpoint, const fs::path& targets,
             const std::vector<std::size_t>& mask, std::optional<std::size_t> horizon) {
  const nlohmann::json doc = nd::read_checkpoint_file(checkpoint);
  VGCRL_CHECK(doc.contains("meta") && doc.at("meta").contains("config"),
              "eval: checkpoint is missing the embedded config");
  ExperimentConfig config =
      ExperimentConfig::from_text(doc.at("meta").at("config").get<std::string>());
  auto trainer = build_trainer(config, config.seeds.front());
  trainer->restore(doc);

  metrics::TargetStateSet target_set = metrics::load_target_states(targets);
  target_set.mask = mask;
  const std::size_t T = horizon.value_or(trainer->eval_env().spec().horizon);
  const auto result =
      metrics::lgr_state(trainer->agent().deterministic_policy(), trainer->posterior(),
                         trainer->eval_env(), target_set, T);

  nlohmann::json report = {
      {"mean_distance", result.mean_distance},
      {"per_target", result.per_target},
      {"n_targets", result.per_target.size()},
      {"horizon", T},
  };
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace vgcrl::cli
