#pragma once

#include <functional>
#include <memory>

#include "vgcrl/agent/replay.hpp"
#include "vgcrl/ndmath/checkpoint.hpp"
#include "vgcrl/ndmath/mlp.hpp"
#include "vgcrl/posterior/posterior.hpp"

namespace vgcrl::rl {

enum class RelabelMode { none, pher, her };
enum class RelabelStrategy { final_state, future, episode };

struct RelabelConfig {
  RelabelMode mode = RelabelMode::pher;
  double fraction = 0.5;
  RelabelStrategy strategy = RelabelStrategy::final_state;

  void validate() const {
    VGCRL_CHECK(fraction >= 0.0 && fraction <= 1.0,
                "relabel_fraction must be in [0, 1], got ", fraction);
  }
};

RelabelMode relabel_mode_from_name(const std::string&);
RelabelStrategy relabel_strategy_from_name(const std::string&);
const char* relabel_mode_name(RelabelMode);
const char* relabel_strategy_name(RelabelStrategy);

// Replaces z on a `fraction` of the batch with a goal derived from the
// transition's episode via the chosen strategy: a fresh draw from the live
// posterior at the anchor state (P-HER) or the posterior expectation at the
// anchor (vanilla HER; with the identity-mean Gaussian this is the anchor
// state itself). Relabeled goals are projected into the prior's support.
void relabel_batch(std::vector<Transition>& batch, const std::vector<std::int64_t>& seqs,
                   const ReplayBuffer& buffer, const post::Posterior& posterior,
                   const post::Prior& prior, const RelabelConfig& config, Rng& rng);

struct SacConfig {
  std::vector<std::size_t> hidden_dims = {128, 128};
  nd::Activation activation = nd::Activation::relu;
  double learning_rate = 3e-4;
  double gamma = 0.99;
  double tau = 0.005;
  std::size_t batch_size = 256;
  std::size_t buffer_capacity = 100000;
  // alpha < 0 enables automatic temperature tuning toward -action_dim target
  // entropy; alpha >= 0 holds the temperature fixed.
  double alpha = -1.0;
  double policy_log_sigma_min = -5.0;
  double policy_log_sigma_max = 2.0;
};

struct SacLosses {
  double q1 = 0, q2 = 0, policy = 0, alpha = 0;
  double alpha_value = 0, mean_q = 0, mean_log_pi = 0, mean_reward = 0;
};

// Goal-conditioned soft actor-critic with twin critics and Polyak targets.
// The policy is a squashed Gaussian over actions in [-1,1]^action_dim; goals
// are one-hot encoded (discrete) or passed through (continuous) and
// concatenated to the observation.
class SacAgent {
 public:
  SacAgent(std::size_t obs_dim, std::size_t goal_enc_dim, std::size_t action_dim,
           const SacConfig& config, std::uint64_t seed);

  std::vector<double> act(std::span<const double> obs, const post::LatentGoal& z,
                          bool deterministic, Rng& rng) const;

  // One gradient step on critics, policy, and (if auto) temperature, from a
  // batch whose rewards are recomputed here with the live posterior.
  SacLosses update(const std::vector<Transition>& batch, const post::Posterior& posterior,
                   const post::Prior& prior, Rng& rng);

  ReplayBuffer& buffer() { return buffer_; }
  const SacConfig& config() const { return config_; }
  double alpha() const;

  // Twin critic values at (s, z, a); diagnostics and tests.
  std::pair<double, double> q_values(std::span<const double> obs, const post::LatentGoal& z,
                                     std::span<const double> action) const;

  // All trainable and target parameters, for checkpointing.
  std::vector<nd::Parameter*> parameters();
  std::vector<std::pair<nd::Parameter*, nd::AdamState*>> optimizer_slots();

  // Deterministic-policy callable for evaluation.
  std::function<std::vector<double>(std::span<const double>, const post::LatentGoal&)>
  deterministic_policy() const;

 private:
  struct PolicyOut {
    nd::Var mu, log_sigma;
  };
  PolicyOut policy_forward(nd::Graph& g, nd::Var input) const;
  void policy_values(const nd::Tensor& input, nd::Tensor& mu, nd::Tensor& log_sigma) const;
  nd::Tensor assemble_inputs(const std::vector<Transition>& batch, bool next_state) const;

  SacConfig config_;
  std::size_t obs_dim_, goal_dim_, action_dim_;

  nd::Mlp policy_trunk_;
  nd::LinearLayer policy_mu_, policy_log_sigma_;
  nd::Mlp q1_, q2_, q1_target_, q2_target_;
  nd::Parameter log_alpha_;
  double target_entropy_;

  nd::AdamOptimizer policy_opt_, q1_opt_, q2_opt_, alpha_opt_;
  ReplayBuffer buffer_;
};

}  // namespace vgcrl::rl
