#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "vgcrl/envs/point_mass.hpp"
#include "vgcrl/posterior/posterior.hpp"

namespace vgcrl::metrics {

using PolicyFn =
    std::function<std::vector<double>(std::span<const double>, const post::LatentGoal&)>;

// Per-evaluation snapshot.
struct MetricsRecord {
  std::int64_t env_steps = 0;
  double objective = 0.0;              // F = E[log q - log p]
  double lgr_z = 0.0;                  // accuracy (discrete) or squared distance (continuous)
  std::optional<double> lgr_s;
  std::optional<double> disc_top1;     // discrete families only
  post::Diagnostics posterior_diag;
};

// Evaluation rollout: the episode's z and every state visited under it.
struct Rollout {
  post::LatentGoal z;
  std::vector<std::vector<double>> states;
};

// Target states for LGR(s): one observation per row, distances restricted to
// `mask` dims (empty mask = all dims).
struct TargetStateSet {
  nd::Tensor targets;  // [N, obs_dim]
  std::vector<std::size_t> mask;

  void validate(std::size_t obs_dim) const;
};

// File format: one target per line, comma-separated decimal observation
// values; an optional first header row (non-numeric) naming the dims.
TargetStateSet load_target_states(const std::filesystem::path& path);

// Monte-Carlo estimate of F over all (z, state) pairs in the rollouts.
double estimate_objective(const post::Posterior& q, const post::Prior& p,
                          const std::vector<Rollout>& rollouts);

enum class EmbedMode { expectation, mode };

struct LgrStateResult {
  double mean_distance = 0.0;
  std::vector<double> per_target;
};

// Algorithm: embed each target via the posterior, run the policy for
// `horizon` steps from a fresh reset, and average the squared distance
// between target and final observation over the masked dims.
LgrStateResult lgr_state(const PolicyFn& policy, const post::Posterior& q,
                         env::PointMassEnv& e, const TargetStateSet& targets,
                         std::size_t horizon, EmbedMode embed = EmbedMode::expectation);

struct LgrLatentResult {
  double lgr_z = 0.0;
  std::optional<double> disc_top1;  // same (z, s_T) pairs, discrete only
};

// Latent goal reaching: z ~ p(z), roll out, compare z to the posterior mode
// at the final state. Top-1 accuracy for discrete goals, mean squared
// distance for continuous ones.
LgrLatentResult lgr_latent(const PolicyFn& policy, const post::Posterior& q,
                           const post::Prior& p, env::PointMassEnv& e, int n_episodes,
                           std::size_t horizon, Rng& rng);

// Fraction of pairs whose posterior argmax equals the label. Discrete only.
double disc_top1(const post::Posterior& q,
                 const std::vector<std::pair<post::LatentGoal, std::vector<double>>>& pairs);

}  // namespace vgcrl::metrics
