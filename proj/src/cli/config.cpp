#include "vgcrl/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vgcrl::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    VGCRL_CHECK(used == v.size(), "config line ", line, ": '", key,
                "' has trailing characters in '", v, "'");
    return x;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail("config line ", line, ": '", key, "' expects a number, got '", v, "'");
  }
}

std::int64_t parse_int(const std::string& v, const std::string& key, int line) {
  const double x = parse_double(v, key, line);
  VGCRL_CHECK(x == std::floor(x), "config line ", line, ": '", key,
              "' expects an integer, got '", v, "'");
  return static_cast<std::int64_t>(x);
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail("config line ", line, ": '", key, "' expects true/false, got '", v, "'");
}

std::vector<std::string> split_csv(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key, int line) {
  std::vector<double> out;
  for (const std::string& cell : split_csv(v)) out.push_back(parse_double(cell, key, line));
  return out;
}

std::vector<std::size_t> parse_index_list(const std::string& v, const std::string& key,
                                          int line) {
  std::vector<std::size_t> out;
  for (const std::string& cell : split_csv(v)) {
    const std::int64_t x = parse_int(cell, key, line);
    VGCRL_CHECK(x >= 0, "config line ", line, ": '", key, "' expects non-negative indices");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

template <typename T>
std::string num_list(const std::vector<T>& xs) {
  std::vector<std::string> parts;
  for (const T& x : xs) {
    std::ostringstream os;
    os << x;
    parts.push_back(os.str());
  }
  return join(parts, ",");
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

nd::Activation activation_from_name(const std::string& v, int line) {
  if (v == "relu") return nd::Activation::relu;
  if (v == "tanh") return nd::Activation::tanh;
  fail("config line ", line, ": activation must be relu or tanh, got '", v, "'");
}

const char* activation_name(nd::Activation a) {
  return a == nd::Activation::relu ? "relu" : "tanh";
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      VGCRL_CHECK(line.back() == ']', "config line ", lineno, ": unterminated section '",
                  line, "'");
      section = trim(line.substr(1, line.size() - 2));
      VGCRL_CHECK(!section.empty(), "config line ", lineno, ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    VGCRL_CHECK(eq != std::string::npos, "config line ", lineno,
                ": expected 'key = value', got '", line, "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    VGCRL_CHECK(!key.empty(), "config line ", lineno, ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    VGCRL_CHECK(!kv.has(full), "config line ", lineno, ": duplicate key '", full, "'");
    kv.entries[full] = {value, lineno};
  }
  return kv;
}

namespace {

// Applies one parsed file onto the config. `consumed` collects handled keys
// so unknown ones can be rejected afterwards.
void apply_key_values(ExperimentConfig& c, const KeyValues& kv) {
  std::set<std::string> consumed;
  auto take = [&](const std::string& key) -> const ConfigEntry* {
    consumed.insert(key);
    const ConfigEntry* e = kv.find(key);
    if (e) c.explicit_keys.insert(key);
    return e;
  };

  if (const auto* e = take("name")) c.name = e->value;
  if (const auto* e = take("seeds")) {
    c.seeds.clear();
    for (const std::string& cell : split_csv(e->value)) {
      const std::int64_t s = parse_int(cell, "seeds", e->line);
      VGCRL_CHECK(s >= 0, "config line ", e->line, ": 'seeds' must be non-negative");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    VGCRL_CHECK(!c.seeds.empty(), "config line ", e->line, ": 'seeds' is empty");
  }

  if (const auto* e = take("env.type")) {
    VGCRL_CHECK(e->value == "windy" || e->value == "projected", "config line ", e->line,
                ": env.type must be windy or projected, got '", e->value, "'");
    c.env_type = e->value;
  }
  if (const auto* e = take("env.n")) {
    const std::int64_t n = parse_int(e->value, "env.n", e->line);
    VGCRL_CHECK(n >= 1, "config line ", e->line, ": env.n must be >= 1");
    c.env.n_dims = static_cast<std::size_t>(n);
  }
  if (const auto* e = take("env.wind")) {
    if (e->value == "ramp") {
      c.env.wind = env::ramp_wind_profile(c.env.n_dims);
    } else {
      c.env.wind = parse_double_list(e->value, "env.wind", e->line);
    }
  }
  if (const auto* e = take("env.horizon")) {
    const std::int64_t h = parse_int(e->value, "env.horizon", e->line);
    VGCRL_CHECK(h >= 1, "config line ", e->line, ": env.horizon must be >= 1");
    c.env.horizon = static_cast<std::size_t>(h);
  }
  if (const auto* e = take("env.projection_rows")) {
    const std::int64_t r = parse_int(e->value, "env.projection_rows", e->line);
    VGCRL_CHECK(r >= 2, "config line ", e->line, ": env.projection_rows must be >= 2");
    c.env.projection_rows = static_cast<std::size_t>(r);
  }
  if (const auto* e = take("env.projection_seed"))
    c.env.projection_seed =
        static_cast<std::uint64_t>(parse_int(e->value, "env.projection_seed", e->line));
  if (const auto* e = take("env.project_velocities"))
    c.env.project_velocities = parse_bool(e->value, "env.project_velocities", e->line);

  if (const auto* e = take("posterior.family"))
    c.posterior.family = post::family_from_name(e->value);
  if (const auto* e = take("posterior.goal_dim")) {
    const std::int64_t d = parse_int(e->value, "posterior.goal_dim", e->line);
    VGCRL_CHECK(d >= 1, "config line ", e->line, ": posterior.goal_dim must be >= 1");
    c.posterior.goal_dim = static_cast<std::size_t>(d);
  }
  if (const auto* e = take("posterior.sigma")) {
    c.posterior.sigma_fixed = parse_double(e->value, "posterior.sigma", e->line);
    VGCRL_CHECK(c.posterior.sigma_fixed > 0.0, "config line ", e->line,
                ": posterior.sigma must be > 0");
  }
  if (const auto* e = take("posterior.squash"))
    c.posterior.squash = parse_bool(e->value, "posterior.squash", e->line);
  if (const auto* e = take("posterior.state_slice")) {
    if (e->value == "all") {
      c.posterior.state_slice.clear();
      c.slice_positions = false;
    } else if (e->value == "positions") {
      c.posterior.state_slice.clear();
      c.slice_positions = true;
    } else {
      c.posterior.state_slice = parse_index_list(e->value, "posterior.state_slice", e->line);
      c.slice_positions = false;
    }
  }
  if (const auto* e = take("posterior.hidden"))
    c.posterior.hidden_dims = [&] {
      std::vector<std::size_t> dims;
      for (std::size_t d : parse_index_list(e->value, "posterior.hidden", e->line)) {
        VGCRL_CHECK(d >= 1, "config line ", e->line, ": posterior.hidden dims must be >= 1");
        dims.push_back(d);
      }
      return dims;
    }();
  if (const auto* e = take("posterior.activation"))
    c.posterior.activation = activation_from_name(e->value, e->line);
  if (const auto* e = take("posterior.spectral_norm")) {
    c.posterior.spectral_coeff = parse_double(e->value, "posterior.spectral_norm", e->line);
    VGCRL_CHECK(c.posterior.spectral_coeff >= 0.0, "config line ", e->line,
                ": posterior.spectral_norm must be >= 0 (0 disables)");
  }
  if (const auto* e = take("posterior.gmm_components")) {
    const std::int64_t k = parse_int(e->value, "posterior.gmm_components", e->line);
    VGCRL_CHECK(k >= 1, "config line ", e->line, ": posterior.gmm_components must be >= 1");
    c.posterior.gmm_components = static_cast<std::size_t>(k);
  }
  if (const auto* e = take("posterior.log_sigma_min"))
    c.posterior.log_sigma_min = parse_double(e->value, "posterior.log_sigma_min", e->line);
  if (const auto* e = take("posterior.log_sigma_max"))
    c.posterior.log_sigma_max = parse_double(e->value, "posterior.log_sigma_max", e->line);
  if (const auto* e = take("posterior.lr")) {
    c.posterior.adam.learning_rate = parse_double(e->value, "posterior.lr", e->line);
    VGCRL_CHECK(c.posterior.adam.learning_rate >= 0.0, "config line ", e->line,
                ": posterior.lr must be >= 0");
  }

  if (const auto* e = take("agent.hidden")) {
    c.sac.hidden_dims.clear();
    for (std::size_t d : parse_index_list(e->value, "agent.hidden", e->line)) {
      VGCRL_CHECK(d >= 1, "config line ", e->line, ": agent.hidden dims must be >= 1");
      c.sac.hidden_dims.push_back(d);
    }
    VGCRL_CHECK(!c.sac.hidden_dims.empty(), "config line ", e->line,
                ": agent.hidden must name at least one layer");
  }
  if (const auto* e = take("agent.activation"))
    c.sac.activation = activation_from_name(e->value, e->line);
  if (const auto* e = take("agent.lr")) {
    c.sac.learning_rate = parse_double(e->value, "agent.lr", e->line);
    VGCRL_CHECK(c.sac.learning_rate >= 0.0, "config line ", e->line,
                ": agent.lr must be >= 0");
  }
  if (const auto* e = take("agent.gamma")) {
    c.sac.gamma = parse_double(e->value, "agent.gamma", e->line);
    VGCRL_CHECK(c.sac.gamma >= 0.0 && c.sac.gamma < 1.0, "config line ", e->line,
                ": agent.gamma must be in [0, 1)");
  }
  if (const auto* e = take("agent.tau")) {
    c.sac.tau = parse_double(e->value, "agent.tau", e->line);
    VGCRL_CHECK(c.sac.tau > 0.0 && c.sac.tau <= 1.0, "config line ", e->line,
                ": agent.tau must be in (0, 1]");
  }
  if (const auto* e = take("agent.batch")) {
    const std::int64_t b = parse_int(e->value, "agent.batch", e->line);
    VGCRL_CHECK(b >= 1, "config line ", e->line, ": agent.batch must be >= 1");
    c.sac.batch_size = static_cast<std::size_t>(b);
  }
  if (const auto* e = take("agent.buffer")) {
    const std::int64_t b = parse_int(e->value, "agent.buffer", e->line);
    VGCRL_CHECK(b >= 1, "config line ", e->line, ": agent.buffer must be >= 1");
    c.sac.buffer_capacity = static_cast<std::size_t>(b);
  }
  if (const auto* e = take("agent.alpha")) {
    if (e->value == "auto") {
      c.sac.alpha = -1.0;
    } else {
      c.sac.alpha = parse_double(e->value, "agent.alpha", e->line);
      VGCRL_CHECK(c.sac.alpha >= 0.0, "config line ", e->line,
                  ": agent.alpha must be 'auto' or >= 0");
    }
  }
  if (const auto* e = take("agent.relabel"))
    c.relabel.mode = rl::relabel_mode_from_name(e->value);
  if (const auto* e = take("agent.relabel_fraction")) {
    c.relabel.fraction = parse_double(e->value, "agent.relabel_fraction", e->line);
    VGCRL_CHECK(c.relabel.fraction >= 0.0 && c.relabel.fraction <= 1.0, "config line ",
                e->line, ": agent.relabel_fraction must be in [0, 1], got ", e->value);
  }
  if (const auto* e = take("agent.relabel_strategy"))
    c.relabel.strategy = rl::relabel_strategy_from_name(e->value);

  if (const auto* e = take("train.total_env_steps"))
    c.train.total_env_steps = parse_int(e->value, "train.total_env_steps", e->line);
  if (const auto* e = take("train.episodes_per_iteration"))
    c.train.episodes_per_iteration =
        static_cast<int>(parse_int(e->value, "train.episodes_per_iteration", e->line));
  if (const auto* e = take("train.discriminator_steps"))
    c.train.discriminator_steps =
        static_cast<int>(parse_int(e->value, "train.discriminator_steps", e->line));
  if (const auto* e = take("train.discriminator_batch"))
    c.train.discriminator_batch = static_cast<std::size_t>(
        parse_int(e->value, "train.discriminator_batch", e->line));
  if (const auto* e = take("train.agent_updates_per_env_step"))
    c.train.agent_updates_per_env_step =
        parse_double(e->value, "train.agent_updates_per_env_step", e->line);
  if (const auto* e = take("train.onpolicy_window"))
    c.train.onpolicy_window =
        static_cast<std::size_t>(parse_int(e->value, "train.onpolicy_window", e->line));
  if (const auto* e = take("train.eval_interval"))
    c.train.eval_interval = parse_int(e->value, "train.eval_interval", e->line);
  if (const auto* e = take("train.eval_objective_episodes"))
    c.train.eval_objective_episodes =
        static_cast<int>(parse_int(e->value, "train.eval_objective_episodes", e->line));
  if (const auto* e = take("train.eval_lgr_episodes"))
    c.train.eval_lgr_episodes =
        static_cast<int>(parse_int(e->value, "train.eval_lgr_episodes", e->line));

  if (const auto* e = take("output.dir")) c.output.dir = e->value;
  if (const auto* e = take("output.formats")) {
    c.output.write_csv = false;
    c.output.write_json = false;
    for (const std::string& f : split_csv(e->value)) {
      if (f == "csv") c.output.write_csv = true;
      else if (f == "json") c.output.write_json = true;
      else fail("config line ", e->line, ": output.formats accepts csv,json; got '", f, "'");
    }
  }
  if (const auto* e = take("eval.targets")) c.lgr_targets_file = e->value;
  if (const auto* e = take("eval.mask"))
    c.lgr_mask = parse_index_list(e->value, "eval.mask", e->line);

  consumed.insert("preset");
  for (const auto& [key, entry] : kv.entries)
    VGCRL_CHECK(consumed.count(key), "config line ", entry.line, ": unknown key '", key, "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  KeyValues kv = parse_key_values(text);
  ExperimentConfig c;
  if (const ConfigEntry* p = kv.find("preset")) {
    VGCRL_CHECK(is_preset_name(p->value), "config line ", p->line, ": unknown preset '",
                p->value, "'");
    KeyValues preset_kv = parse_key_values(preset_text(p->value));
    c.name = p->value;
    apply_key_values(c, preset_kv);
    // Explicit keys of the preset stay marked; user keys override below.
  }
  apply_key_values(c, kv);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  VGCRL_CHECK(in.good(), "config: cannot open '", path, "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void ExperimentConfig::validate() const {
  VGCRL_CHECK(!name.empty(), "config: empty run name");
  VGCRL_CHECK(!seeds.empty(), "config: no seeds");
  relabel.validate();
  train.validate();
  if (relabel.mode == rl::RelabelMode::her)
    VGCRL_CHECK(posterior.family == post::Family::fixed_gaussian ||
                    posterior.family == post::Family::adaptive_gaussian,
                "config: agent.relabel = her needs an identity-mean Gaussian family");
  if (env_type == "windy" && !env.wind.empty())
    VGCRL_CHECK(env.wind.size() == env.n_dims, "config: env.wind has ", env.wind.size(),
                " entries for env.n = ", env.n_dims);
}

namespace {

struct RenderedKey {
  std::string key, value;
};

std::vector<RenderedKey> render_keys(const ExperimentConfig& c) {
  std::vector<RenderedKey> out;
  auto add = [&](const std::string& k, const std::string& v) { out.push_back({k, v}); };

  add("name", c.name);
  add("seeds", num_list(c.seeds));

  add("env.type", c.env_type);
  add("env.n", std::to_string(c.env.n_dims));
  std::vector<std::string> wind;
  const std::size_t wind_n = c.env.wind.empty() ? c.env.n_dims : c.env.wind.size();
  for (std::size_t i = 0; i < wind_n; ++i)
    wind.push_back(fmt_double(c.env.wind.empty() ? 0.0 : c.env.wind[i]));
  add("env.wind", join(wind, ","));
  add("env.horizon", std::to_string(c.env.horizon));
  add("env.projection_rows", std::to_string(c.env.projection_rows));
  add("env.projection_seed", std::to_string(c.env.projection_seed));
  add("env.project_velocities", c.env.project_velocities ? "true" : "false");

  add("posterior.family", post::family_name(c.posterior.family));
  add("posterior.goal_dim", std::to_string(c.posterior.goal_dim));
  add("posterior.sigma", fmt_double(c.posterior.sigma_fixed));
  add("posterior.squash", c.posterior.squash ? "true" : "false");
  add("posterior.state_slice", c.slice_positions
                                   ? std::string("positions")
                                   : (c.posterior.state_slice.empty()
                                          ? std::string("all")
                                          : num_list(c.posterior.state_slice)));
  add("posterior.hidden", num_list(c.posterior.hidden_dims));
  add("posterior.activation", activation_name(c.posterior.activation));
  add("posterior.spectral_norm", fmt_double(c.posterior.spectral_coeff));
  add("posterior.gmm_components", std::to_string(c.posterior.gmm_components));
  add("posterior.log_sigma_min", fmt_double(c.posterior.log_sigma_min));
  add("posterior.log_sigma_max", fmt_double(c.posterior.log_sigma_max));
  add("posterior.lr", fmt_double(c.posterior.adam.learning_rate));

  add("agent.hidden", num_list(c.sac.hidden_dims));
  add("agent.activation", activation_name(c.sac.activation));
  add("agent.lr", fmt_double(c.sac.learning_rate));
  add("agent.gamma", fmt_double(c.sac.gamma));
  add("agent.tau", fmt_double(c.sac.tau));
  add("agent.batch", std::to_string(c.sac.batch_size));
  add("agent.buffer", std::to_string(c.sac.buffer_capacity));
  add("agent.alpha", c.sac.alpha < 0.0 ? std::string("auto") : fmt_double(c.sac.alpha));
  add("agent.relabel", rl::relabel_mode_name(c.relabel.mode));
  add("agent.relabel_fraction", fmt_double(c.relabel.fraction));
  add("agent.relabel_strategy", rl::relabel_strategy_name(c.relabel.strategy));

  add("train.total_env_steps", std::to_string(c.train.total_env_steps));
  add("train.episodes_per_iteration", std::to_string(c.train.episodes_per_iteration));
  add("train.discriminator_steps", std::to_string(c.train.discriminator_steps));
  add("train.discriminator_batch", std::to_string(c.train.discriminator_batch));
  add("train.agent_updates_per_env_step", fmt_double(c.train.agent_updates_per_env_step));
  add("train.onpolicy_window", std::to_string(c.train.onpolicy_window));
  add("train.eval_interval", std::to_string(c.train.eval_interval));
  add("train.eval_objective_episodes", std::to_string(c.train.eval_objective_episodes));
  add("train.eval_lgr_episodes", std::to_string(c.train.eval_lgr_episodes));

  add("output.dir", c.output.dir);
  std::vector<std::string> fmts;
  if (c.output.write_csv) fmts.push_back("csv");
  if (c.output.write_json) fmts.push_back("json");
  add("output.formats", join(fmts, ","));
  if (c.lgr_targets_file) {
    add("eval.targets", *c.lgr_targets_file);
    if (!c.lgr_mask.empty()) add("eval.mask", num_list(c.lgr_mask));
  }
  return out;
}

std::string render(const ExperimentConfig& c, bool mark_defaults) {
  std::string out;
  std::string section;
  for (const RenderedKey& rk : render_keys(c)) {
    const auto dot = rk.key.find('.');
    const std::string sec = dot == std::string::npos ? "" : rk.key.substr(0, dot);
    const std::string bare = dot == std::string::npos ? rk.key : rk.key.substr(dot + 1);
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += bare + " = " + rk.value;
    if (mark_defaults && !c.explicit_keys.count(rk.key)) out += "  # (default)";
    out += "\n";
  }
  return out;
}

}  // namespace

std::string ExperimentConfig::resolved_text() const { return render(*this, false); }
std::string ExperimentConfig::echo_text() const { return render(*this, true); }

env::PointMassEnv build_env(const ExperimentConfig& config, std::uint64_t seed) {
  env::PointMassConfig ec = config.env;
  ec.projected = config.env_type == "projected";
  if (ec.projected) ec.wind.assign(ec.n_dims, 0.0);
  return env::PointMassEnv(std::move(ec), derive_seed(seed, 0xE1));
}

post::Prior build_prior(const ExperimentConfig& config) {
  return config.posterior.family == post::Family::categorical
             ? post::Prior::uniform_categorical(config.posterior.goal_dim)
             : post::Prior::uniform_box(config.posterior.goal_dim);
}

std::unique_ptr<train::Trainer> build_trainer(const ExperimentConfig& config,
                                              std::uint64_t seed) {
  env::PointMassEnv e = build_env(config, seed);
  const env::EnvSpec spec = e.spec();

  post::PosteriorConfig pc = config.posterior;
  pc.obs_dim = spec.obs_dim;
  if (config.slice_positions) {
    pc.state_slice.clear();
    const std::size_t n_pos =
        config.env_type == "projected" ? config.env.projection_rows : config.env.n_dims;
    for (std::size_t i = 0; i < n_pos; ++i) pc.state_slice.push_back(i);
  }
  auto posterior = post::make_posterior(pc, derive_seed(seed, 0xD1));
  post::Prior prior = build_prior(config);
  auto agent = std::make_unique<rl::SacAgent>(spec.obs_dim, prior.encoding_dim(),
                                              spec.action_dim, config.sac,
                                              derive_seed(seed, 0xA6));
  auto trainer = std::make_unique<train::Trainer>(std::move(e), prior, std::move(posterior),
                                                  std::move(agent), config.relabel,
                                                  config.train, seed);
  if (config.lgr_targets_file) {
    metrics::TargetStateSet targets = metrics::load_target_states(*config.lgr_targets_file);
    targets.mask = config.lgr_mask;
    trainer->set_lgr_targets(std::move(targets));
  }
  return trainer;
}

}  // namespace vgcrl::cli
