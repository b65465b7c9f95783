#include <array>
#include <utility>

#include "vgcrl/cli/config.hpp"

namespace vgcrl::cli {

namespace {

// Desk-scale studies on the point-mass environments. Budgets are sized so a
// run finishes in minutes on one core while still reaching the regimes the
// acceptance suite checks.

constexpr const char* kDiscreteCommon = R"(
[env]
type = windy
n = 2
wind = 0,0
horizon = 100

[posterior]
state_slice = positions
hidden = 128,128
activation = relu
lr = 3e-4

[agent]
hidden = 128,128
batch = 128
relabel = pher
relabel_fraction = 0.5
relabel_strategy = final

[train]
total_env_steps = 40000
episodes_per_iteration = 4
discriminator_steps = 16
discriminator_batch = 128
agent_updates_per_env_step = 0.5
onpolicy_window = 2048
eval_interval = 4000
eval_objective_episodes = 16
eval_lgr_episodes = 200
)";

std::string discrete_preset(const std::string& name, int num_goals, bool sn) {
  std::string text = "name = " + name + "\n";
  text += kDiscreteCommon;
  text += "[posterior]\nfamily = categorical\ngoal_dim = " + std::to_string(num_goals) + "\n";
  text += "spectral_norm = " + std::string(sn ? "2.0" : "0") + "\n";
  text += "[output]\ndir = out/" + name + "\n";
  return text;
}

std::string agcrl_preset(const std::string& name, int n_dims) {
  std::string text = "name = " + name + R"(

[env]
type = windy
horizon = 100
)";
  text += "n = " + std::to_string(n_dims) + "\n";
  text += n_dims == 2 ? "wind = 0,40\n" : "wind = ramp\n";
  text += R"(
[posterior]
family = adaptive_gaussian
state_slice = positions
sigma = 1.0
squash = false
lr = 1e-3
)";
  text += "goal_dim = " + std::to_string(n_dims) + "\n";
  text += R"(
[agent]
hidden = 128,128
batch = 128
relabel = her
relabel_fraction = 0.5
relabel_strategy = final

[train]
total_env_steps = 40000
episodes_per_iteration = 4
discriminator_steps = 16
discriminator_batch = 256
agent_updates_per_env_step = 0.5
onpolicy_window = 4096
eval_interval = 4000
eval_objective_episodes = 16
eval_lgr_episodes = 64
)";
  text += "[output]\ndir = out/" + name + "\n";
  return text;
}

std::string lingcrl_preset(const std::string& name, int rows) {
  std::string text = "name = " + name + R"(

[env]
type = projected
n = 2
horizon = 100
projection_seed = 42
)";
  text += "projection_rows = " + std::to_string(rows) + "\n";
  text += R"(
[posterior]
family = linear_gaussian
goal_dim = 2
state_slice = positions
sigma = 1.0
squash = false
lr = 1e-3

[agent]
hidden = 128,128
batch = 128
relabel = pher
relabel_fraction = 0.5
relabel_strategy = final

[train]
total_env_steps = 40000
episodes_per_iteration = 4
discriminator_steps = 16
discriminator_batch = 256
agent_updates_per_env_step = 0.5
onpolicy_window = 4096
eval_interval = 4000
eval_objective_episodes = 16
eval_lgr_episodes = 64
)";
  text += "[output]\ndir = out/" + name + "\n";
  return text;
}

std::string gcrl_preset() {
  return R"(name = gcrl-reach-2d

[env]
type = windy
n = 2
wind = 0,0
horizon = 100

[posterior]
family = fixed_gaussian
goal_dim = 2
state_slice = positions
sigma = 1.0
squash = false

[agent]
hidden = 128,128
batch = 128
relabel = her
relabel_fraction = 0.5
relabel_strategy = final

[train]
total_env_steps = 30000
episodes_per_iteration = 4
discriminator_steps = 0
discriminator_batch = 128
agent_updates_per_env_step = 0.5
onpolicy_window = 2048
eval_interval = 3000
eval_objective_episodes = 16
eval_lgr_episodes = 64

[output]
dir = out/gcrl-reach-2d
)";
}

const std::vector<std::pair<std::string, std::string>>& preset_table() {
  static const std::vector<std::pair<std::string, std::string>> table = [] {
    std::vector<std::pair<std::string, std::string>> t;
    for (int g : {10, 20, 50}) {
      t.emplace_back("table2-g" + std::to_string(g),
                     discrete_preset("table2-g" + std::to_string(g), g, false));
      t.emplace_back("table2-g" + std::to_string(g) + "-sn",
                     discrete_preset("table2-g" + std::to_string(g) + "-sn", g, true));
    }
    t.emplace_back("agcrl-windy-2d", agcrl_preset("agcrl-windy-2d", 2));
    t.emplace_back("agcrl-windy-10d", agcrl_preset("agcrl-windy-10d", 10));
    t.emplace_back("lingcrl-proj-2x2", lingcrl_preset("lingcrl-proj-2x2", 2));
    t.emplace_back("lingcrl-proj-10x2", lingcrl_preset("lingcrl-proj-10x2", 10));
    t.emplace_back("pher-ablation-g50", discrete_preset("pher-ablation-g50", 50, true));
    t.emplace_back("gcrl-reach-2d", gcrl_preset());
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_table()) names.push_back(name);
  return names;
}

bool is_preset_name(const std::string& name) {
  for (const auto& [n, text] : preset_table())
    if (n == name) return true;
  return false;
}

const std::string& preset_text(const std::string& name) {
  for (const auto& [n, text] : preset_table())
    if (n == name) return text;
  fail("unknown preset '", name, "'");
}

}  // namespace vgcrl::cli
