#pragma once

#include <deque>
#include <memory>

#include "vgcrl/agent/sac.hpp"
#include "vgcrl/metrics/metrics.hpp"

namespace vgcrl::train {

struct TrainConfig {
  std::int64_t total_env_steps = 60000;
  int episodes_per_iteration = 4;
  int discriminator_steps = 32;
  std::size_t discriminator_batch = 256;
  double agent_updates_per_env_step = 1.0;
  std::size_t onpolicy_window = 2048;
  std::int64_t eval_interval = 5000;
  int eval_objective_episodes = 16;
  int eval_lgr_episodes = 64;

  void validate() const {
    VGCRL_CHECK(total_env_steps >= 1, "train: total_env_steps must be >= 1");
    VGCRL_CHECK(episodes_per_iteration >= 1, "train: episodes_per_iteration must be >= 1");
    VGCRL_CHECK(discriminator_steps >= 0, "train: discriminator_steps must be >= 0");
    VGCRL_CHECK(discriminator_batch >= 1, "train: discriminator_batch must be >= 1");
    VGCRL_CHECK(agent_updates_per_env_step >= 0.0, "train: agent_updates_per_env_step < 0");
    VGCRL_CHECK(onpolicy_window >= 1, "train: onpolicy_window must be >= 1");
    VGCRL_CHECK(eval_interval >= 1, "train: eval_interval must be >= 1");
    VGCRL_CHECK(eval_objective_episodes >= 1 && eval_lgr_episodes >= 1,
                "train: eval episode counts must be >= 1");
  }
};

struct IterationStats {
  std::int64_t env_steps = 0;
  double disc_loss = 0.0;
  rl::SacLosses agent;
  int agent_updates = 0;
};

// The alternating loop: collect full episodes with z ~ p(z), fit the
// discriminator on recent on-policy (z, s) pairs with their original goals,
// then run off-policy agent updates on relabeled batches with freshly
// recomputed rewards. Discriminator fitting in iteration i strictly precedes
// the policy updates that consume it.
class Trainer {
 public:
  Trainer(env::PointMassEnv env, post::Prior prior,
          std::unique_ptr<post::Posterior> posterior, std::unique_ptr<rl::SacAgent> agent,
          rl::RelabelConfig relabel, TrainConfig config, std::uint64_t seed);

  IterationStats run_iteration();

  // Runs until total_env_steps, emitting a MetricsRecord every eval_interval
  // env steps (and once at the end).
  std::vector<metrics::MetricsRecord> run_training(
      const std::function<void(const metrics::MetricsRecord&)>& sink = {});

  metrics::MetricsRecord evaluate();

  nlohmann::json checkpoint(const std::string& config_text) const;
  void restore(const nlohmann::json& doc);

  std::int64_t env_steps() const { return env_steps_; }
  post::Posterior& posterior() { return *posterior_; }
  rl::SacAgent& agent() { return *agent_; }
  const post::Prior& prior() const { return prior_; }
  env::PointMassEnv& eval_env() { return eval_env_; }

  void set_lgr_targets(metrics::TargetStateSet targets) { targets_ = std::move(targets); }

  using OnPolicyPair = std::pair<post::LatentGoal, std::vector<double>>;
  const std::deque<OnPolicyPair>& onpolicy_window() const { return window_; }

 private:
  std::vector<nd::Parameter*> all_parameters() const;
  std::vector<std::pair<nd::Parameter*, nd::AdamState*>> all_optimizer_slots() const;

  env::PointMassEnv env_;
  env::PointMassEnv eval_env_;
  post::Prior prior_;
  std::unique_ptr<post::Posterior> posterior_;
  std::unique_ptr<rl::SacAgent> agent_;
  rl::RelabelConfig relabel_;
  TrainConfig config_;

  Rng goal_rng_, rollout_rng_, update_rng_, eval_rng_;
  std::deque<OnPolicyPair> window_;
  std::int64_t env_steps_ = 0;
  std::int64_t iteration_ = 0;
  double update_debt_ = 0.0;
  std::optional<metrics::TargetStateSet> targets_;
};

}  // namespace vgcrl::train
