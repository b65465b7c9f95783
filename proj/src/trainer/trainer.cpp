#include "vgcrl/trainer/trainer.hpp"

#include <cmath>

namespace vgcrl::train {

Trainer::Trainer(env::PointMassEnv env, post::Prior prior,
                 std::unique_ptr<post::Posterior> posterior,
                 std::unique_ptr<rl::SacAgent> agent, rl::RelabelConfig relabel,
                 TrainConfig config, std::uint64_t seed)
    : env_(std::move(env)),
      eval_env_(env_.config(), derive_seed(seed, 0xEAA1)),
      prior_(prior),
      posterior_(std::move(posterior)),
      agent_(std::move(agent)),
      relabel_(relabel),
      config_(config),
      goal_rng_(derive_seed(seed, 0x60)),
      rollout_rng_(derive_seed(seed, 0x61)),
      update_rng_(derive_seed(seed, 0x62)),
      eval_rng_(derive_seed(seed, 0x63)) {
  config_.validate();
  relabel_.validate();
  env_.reseed(derive_seed(seed, 0xE0));
}

IterationStats Trainer::run_iteration() {
  IterationStats stats;

  // (a) On-policy collection with per-episode z ~ p(z).
  std::int64_t collected = 0;
  for (int ep = 0; ep < config_.episodes_per_iteration; ++ep) {
    const post::LatentGoal z = prior_.sample(goal_rng_);
    rl::Trajectory traj;
    traj.z = z;
    std::vector<double> obs = env_.reset();
    bool done = false;
    while (!done) {
      std::vector<double> action = agent_->act(obs, z, /*deterministic=*/false, rollout_rng_);
      auto step = env_.step(action);
      rl::Step s;
      s.s = obs;
      s.a = std::move(action);
      s.s2 = step.obs;
      // Episodes end by horizon only; the time limit is not a terminal state,
      // so the stored flag never cuts the bootstrap.
      s.done = false;
      window_.emplace_back(z, step.obs);
      while (window_.size() > config_.onpolicy_window) window_.pop_front();
      traj.steps.push_back(std::move(s));
      obs = std::move(step.obs);
      done = step.done;
      ++collected;
    }
    agent_->buffer().store_episode(traj);
  }
  env_steps_ += collected;
  stats.env_steps = env_steps_;

  // (b) Discriminator regression on the recent on-policy window, never
  // relabeled.
  double disc_loss_sum = 0.0;
  for (int k = 0; k < config_.discriminator_steps; ++k) {
    const std::size_t batch = std::min(config_.discriminator_batch, window_.size());
    nd::Tensor states = nd::Tensor::zeros(batch, window_.front().second.size());
    std::vector<post::LatentGoal> zs(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      const OnPolicyPair& pair =
          window_[static_cast<std::size_t>(update_rng_.below(window_.size()))];
      zs[i] = pair.first;
      for (std::size_t j = 0; j < pair.second.size(); ++j) states.at(i, j) = pair.second[j];
    }
    disc_loss_sum += posterior_->fit_discriminator_step(zs, states);
  }
  stats.disc_loss = config_.discriminator_steps > 0
                        ? disc_loss_sum / config_.discriminator_steps
                        : 0.0;

  // (c) Off-policy agent updates with P-HER relabeling and live rewards.
  update_debt_ += config_.agent_updates_per_env_step * static_cast<double>(collected);
  int updates = static_cast<int>(update_debt_);
  update_debt_ -= updates;
  const std::size_t batch_size =
      std::min<std::size_t>(agent_->config().batch_size, agent_->buffer().size());
  for (int k = 0; k < updates; ++k) {
    const std::vector<std::int64_t> seqs = agent_->buffer().sample(batch_size, update_rng_);
    std::vector<rl::Transition> batch;
    batch.reserve(seqs.size());
    for (std::int64_t seq : seqs) batch.push_back(agent_->buffer().at(seq));
    rl::relabel_batch(batch, seqs, agent_->buffer(), *posterior_, prior_, relabel_,
                      update_rng_);
    stats.agent = agent_->update(batch, *posterior_, prior_, update_rng_);
    ++stats.agent_updates;
  }

  ++iteration_;
  return stats;
}

metrics::MetricsRecord Trainer::evaluate() {
  metrics::MetricsRecord rec;
  rec.env_steps = env_steps_;

  // F over fresh stochastic rollouts (the sampling distribution of Eq. 2).
  std::vector<metrics::Rollout> rollouts;
  rollouts.reserve(config_.eval_objective_episodes);
  for (int ep = 0; ep < config_.eval_objective_episodes; ++ep) {
    metrics::Rollout r;
    r.z = prior_.sample(eval_rng_);
    std::vector<double> obs = eval_env_.reset();
    bool done = false;
    while (!done) {
      auto step = eval_env_.step(agent_->act(obs, r.z, false, eval_rng_));
      r.states.push_back(step.obs);
      obs = std::move(step.obs);
      done = step.done;
    }
    rollouts.push_back(std::move(r));
  }
  rec.objective = metrics::estimate_objective(*posterior_, prior_, rollouts);

  const auto policy = agent_->deterministic_policy();
  const auto lgr = metrics::lgr_latent(policy, *posterior_, prior_, eval_env_,
                                       config_.eval_lgr_episodes,
                                       eval_env_.spec().horizon, eval_rng_);
  rec.lgr_z = lgr.lgr_z;
  rec.disc_top1 = lgr.disc_top1;

  if (targets_)
    rec.lgr_s = metrics::lgr_state(policy, *posterior_, eval_env_, *targets_,
                                   eval_env_.spec().horizon)
                    .mean_distance;

  rec.posterior_diag = posterior_->describe();
  return rec;
}

std::vector<metrics::MetricsRecord> Trainer::run_training(
    const std::function<void(const metrics::MetricsRecord&)>& sink) {
  std::vector<metrics::MetricsRecord> records;
  std::int64_t next_eval = ((env_steps_ / config_.eval_interval) + 1) * config_.eval_interval;
  while (env_steps_ < config_.total_env_steps) {
    run_iteration();
    if (env_steps_ >= next_eval || env_steps_ >= config_.total_env_steps) {
      records.push_back(evaluate());
      if (sink) sink(records.back());
      while (next_eval <= env_steps_) next_eval += config_.eval_interval;
    }
  }
  return records;
}

std::vector<nd::Parameter*> Trainer::all_parameters() const {
  std::vector<nd::Parameter*> out = posterior_->parameters();
  for (auto* p : agent_->parameters()) out.push_back(p);
  return out;
}

std::vector<std::pair<nd::Parameter*, nd::AdamState*>> Trainer::all_optimizer_slots() const {
  auto out = posterior_->optimizer().slots();
  for (auto& slot : agent_->optimizer_slots()) out.push_back(slot);
  return out;
}

nlohmann::json Trainer::checkpoint(const std::string& config_text) const {
  nlohmann::json doc;
  doc["format"] = "vgcrl-checkpoint-v1";
  doc["params"] = nd::params_to_json(all_parameters());
  doc["adam"] = nd::adam_to_json(all_optimizer_slots());
  doc["meta"] = {
      {"env_steps", env_steps_},
      {"iteration", iteration_},
      {"update_debt", update_debt_},
      {"rng",
       {{"goal", goal_rng_.save_state()},
        {"rollout", rollout_rng_.save_state()},
        {"update", update_rng_.save_state()},
        {"eval", eval_rng_.save_state()}}},
      {"config", config_text},
  };
  return doc;
}

void Trainer::restore(const nlohmann::json& doc) {
  VGCRL_CHECK(doc.contains("format") && doc.at("format") == "vgcrl-checkpoint-v1",
              "checkpoint: unknown format");
  nd::params_from_json(doc.at("params"), all_parameters());
  nd::adam_from_json(doc.at("adam"), all_optimizer_slots());
  const auto& meta = doc.at("meta");
  env_steps_ = meta.at("env_steps").get<std::int64_t>();
  iteration_ = meta.at("iteration").get<std::int64_t>();
  update_debt_ = meta.at("update_debt").get<double>();
  const auto& rng = meta.at("rng");
  goal_rng_.load_state(rng.at("goal").get<std::string>());
  rollout_rng_.load_state(rng.at("rollout").get<std::string>());
  update_rng_.load_state(rng.at("update").get<std::string>());
  eval_rng_.load_state(rng.at("eval").get<std::string>());
}

}  // namespace vgcrl::train
