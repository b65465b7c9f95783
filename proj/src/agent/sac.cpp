#include "vgcrl/agent/sac.hpp"

#include <cmath>

#include "vgcrl/kernels/kernels.hpp"

namespace vgcrl::rl {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kSquashEps = 1e-12;

nd::MlpSpec trunk_spec(std::size_t input, const std::vector<std::size_t>& hidden,
                       nd::Activation act) {
  VGCRL_CHECK(!hidden.empty(), "sac: at least one hidden layer required");
  nd::MlpSpec spec;
  spec.input_dim = input;
  spec.hidden_dims.assign(hidden.begin(), hidden.end() - 1);
  spec.activation = act;
  spec.output_dim = hidden.back();
  return spec;
}

nd::MlpSpec critic_spec(std::size_t input, const std::vector<std::size_t>& hidden,
                        nd::Activation act) {
  nd::MlpSpec spec;
  spec.input_dim = input;
  spec.hidden_dims = hidden;
  spec.activation = act;
  spec.output_dim = 1;
  return spec;
}

void copy_params(nd::Mlp& from, nd::Mlp& to) {
  auto a = from.parameters();
  auto b = to.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) b[i]->value = a[i]->value;
}

nd::Mlp make_mlp(const std::string& name, const nd::MlpSpec& spec, std::uint64_t seed,
                 bool activate_output = false) {
  Rng rng(seed);
  return nd::Mlp(name, spec, rng, activate_output);
}

nd::LinearLayer make_linear(const std::string& name, std::size_t in, std::size_t out,
                            std::uint64_t seed, nd::InitKind kind) {
  Rng rng(seed);
  return nd::LinearLayer(name, in, out, rng, kind);
}

}  // namespace

const char* relabel_mode_name(RelabelMode m) {
  switch (m) {
    case RelabelMode::none: return "none";
    case RelabelMode::pher: return "pher";
    case RelabelMode::her: return "her";
  }
  return "?";
}

const char* relabel_strategy_name(RelabelStrategy s) {
  switch (s) {
    case RelabelStrategy::final_state: return "final";
    case RelabelStrategy::future: return "future";
    case RelabelStrategy::episode: return "episode";
  }
  return "?";
}

RelabelMode relabel_mode_from_name(const std::string& name) {
  for (RelabelMode m : {RelabelMode::none, RelabelMode::pher, RelabelMode::her})
    if (name == relabel_mode_name(m)) return m;
  fail("relabel: unknown mode '", name, "'");
}

RelabelStrategy relabel_strategy_from_name(const std::string& name) {
  for (RelabelStrategy s :
       {RelabelStrategy::final_state, RelabelStrategy::future, RelabelStrategy::episode})
    if (name == relabel_strategy_name(s)) return s;
  fail("relabel: unknown strategy '", name, "'");
}

void relabel_batch(std::vector<Transition>& batch, const std::vector<std::int64_t>& seqs,
                   const ReplayBuffer& buffer, const post::Posterior& posterior,
                   const post::Prior& prior, const RelabelConfig& config, Rng& rng) {
  config.validate();
  if (config.mode == RelabelMode::none || config.fraction == 0.0) return;
  VGCRL_CHECK(batch.size() == seqs.size(), "relabel: batch/seq size mismatch");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!rng.bernoulli(config.fraction)) continue;
    const std::vector<double>* anchor = nullptr;
    switch (config.strategy) {
      case RelabelStrategy::final_state:
        anchor = &buffer.episode_final_obs(seqs[i]);
        break;
      case RelabelStrategy::future: {
        auto [lo, hi] = buffer.episode_live_range(seqs[i]);
        lo = std::max(lo, seqs[i]);
        const std::int64_t pick = lo + static_cast<std::int64_t>(
                                           rng.below(static_cast<std::uint64_t>(hi - lo)));
        anchor = &buffer.at(pick).s2;
        break;
      }
      case RelabelStrategy::episode: {
        auto [lo, hi] = buffer.episode_live_range(seqs[i]);
        const std::int64_t pick = lo + static_cast<std::int64_t>(
                                           rng.below(static_cast<std::uint64_t>(hi - lo)));
        anchor = &buffer.at(pick).s2;
        break;
      }
    }
    post::LatentGoal z = config.mode == RelabelMode::pher
                             ? posterior.sample(*anchor, rng)
                             : posterior.expectation(*anchor);
    batch[i].z = prior.clamp_to_support(z);
  }
}

SacAgent::SacAgent(std::size_t obs_dim, std::size_t goal_enc_dim, std::size_t action_dim,
                   const SacConfig& config, std::uint64_t seed)
    : config_(config),
      obs_dim_(obs_dim),
      goal_dim_(goal_enc_dim),
      action_dim_(action_dim),
      policy_trunk_(make_mlp(
          "policy.trunk",
          trunk_spec(obs_dim + goal_enc_dim, config.hidden_dims, config.activation),
          derive_seed(seed, 1), /*activate_output=*/true)),
      policy_mu_(make_linear("policy.mu", config.hidden_dims.back(), action_dim,
                             derive_seed(seed, 2), nd::InitKind::zero)),
      policy_log_sigma_(make_linear("policy.log_sigma", config.hidden_dims.back(), action_dim,
                                    derive_seed(seed, 3), nd::InitKind::zero)),
      q1_(make_mlp("q1",
                   critic_spec(obs_dim + goal_enc_dim + action_dim, config.hidden_dims,
                               config.activation),
                   derive_seed(seed, 4))),
      q2_(make_mlp("q2",
                   critic_spec(obs_dim + goal_enc_dim + action_dim, config.hidden_dims,
                               config.activation),
                   derive_seed(seed, 5))),
      q1_target_(make_mlp("q1_target",
                          critic_spec(obs_dim + goal_enc_dim + action_dim, config.hidden_dims,
                                      config.activation),
                          derive_seed(seed, 4))),
      q2_target_(make_mlp("q2_target",
                          critic_spec(obs_dim + goal_enc_dim + action_dim, config.hidden_dims,
                                      config.activation),
                          derive_seed(seed, 5))),
      log_alpha_("log_alpha", nd::Tensor::scalar(0.0)),
      target_entropy_(-static_cast<double>(action_dim)),
      buffer_(config.buffer_capacity) {
  copy_params(q1_, q1_target_);
  copy_params(q2_, q2_target_);

  nd::AdamConfig adam;
  adam.learning_rate = config_.learning_rate;
  std::vector<nd::Parameter*> policy_params = policy_trunk_.parameters();
  for (auto* p : policy_mu_.parameters()) policy_params.push_back(p);
  for (auto* p : policy_log_sigma_.parameters()) policy_params.push_back(p);
  policy_opt_ = nd::AdamOptimizer(policy_params, adam);
  q1_opt_ = nd::AdamOptimizer(q1_.parameters(), adam);
  q2_opt_ = nd::AdamOptimizer(q2_.parameters(), adam);
  alpha_opt_ = nd::AdamOptimizer({&log_alpha_}, adam);
}

double SacAgent::alpha() const {
  return config_.alpha >= 0.0 ? config_.alpha : std::exp(log_alpha_.value[0]);
}

std::pair<double, double> SacAgent::q_values(std::span<const double> obs,
                                             const post::LatentGoal& z,
                                             std::span<const double> action) const {
  std::vector<double> x(obs.begin(), obs.end());
  const std::vector<double> enc = post::encode_goal(z, goal_dim_);
  x.insert(x.end(), enc.begin(), enc.end());
  x.insert(x.end(), action.begin(), action.end());
  const nd::Tensor in = nd::Tensor::row(std::move(x));
  return {q1_.forward_values(in)[0], q2_.forward_values(in)[0]};
}

SacAgent::PolicyOut SacAgent::policy_forward(nd::Graph& g, nd::Var input) const {
  nd::Var feat = policy_trunk_.forward(g, input);
  nd::Var mu = policy_mu_.forward(g, feat);
  nd::Var log_sigma = g.clamp(policy_log_sigma_.forward(g, feat),
                              config_.policy_log_sigma_min, config_.policy_log_sigma_max);
  return {mu, log_sigma};
}

void SacAgent::policy_values(const nd::Tensor& input, nd::Tensor& mu,
                             nd::Tensor& log_sigma) const {
  const nd::Tensor feat = policy_trunk_.forward_values(input);
  mu = policy_mu_.forward_values(feat);
  log_sigma = policy_log_sigma_.forward_values(feat);
  for (std::size_t i = 0; i < log_sigma.size(); ++i)
    log_sigma[i] = std::clamp(log_sigma[i], config_.policy_log_sigma_min,
                              config_.policy_log_sigma_max);
}

std::vector<double> SacAgent::act(std::span<const double> obs, const post::LatentGoal& z,
                                  bool deterministic, Rng& rng) const {
  VGCRL_CHECK(obs.size() == obs_dim_, "sac act: observation has ", obs.size(),
              " dims, expected ", obs_dim_);
  std::vector<double> x(obs.begin(), obs.end());
  const std::vector<double> enc = post::encode_goal(z, goal_dim_);
  x.insert(x.end(), enc.begin(), enc.end());
  nd::Tensor mu, ls;
  policy_values(nd::Tensor::row(std::move(x)), mu, ls);
  std::vector<double> action(action_dim_);
  for (std::size_t j = 0; j < action_dim_; ++j) {
    const double u = deterministic ? mu[j] : mu[j] + std::exp(ls[j]) * rng.normal();
    VGCRL_CHECK(std::isfinite(u), "sac act: non-finite policy output in dim ", j);
    action[j] = std::tanh(u);
  }
  return action;
}

nd::Tensor SacAgent::assemble_inputs(const std::vector<Transition>& batch,
                                     bool next_state) const {
  const std::size_t width = obs_dim_ + goal_dim_;
  nd::Tensor x = nd::Tensor::zeros(batch.size(), width);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::vector<double>& obs = next_state ? batch[b].s2 : batch[b].s;
    VGCRL_CHECK(obs.size() == obs_dim_, "sac update: transition obs dim ", obs.size(),
                " vs ", obs_dim_);
    for (std::size_t j = 0; j < obs_dim_; ++j) x.at(b, j) = obs[j];
    const std::vector<double> enc = post::encode_goal(batch[b].z, goal_dim_);
    for (std::size_t j = 0; j < goal_dim_; ++j) x.at(b, obs_dim_ + j) = enc[j];
  }
  return x;
}

SacLosses SacAgent::update(const std::vector<Transition>& batch,
                           const post::Posterior& posterior, const post::Prior& prior,
                           Rng& rng) {
  VGCRL_CHECK(!batch.empty(), "sac update: empty batch");
  const std::size_t B = batch.size();
  const double alpha_now = alpha();

  const nd::Tensor X = assemble_inputs(batch, false);
  const nd::Tensor X2 = assemble_inputs(batch, true);
  nd::Tensor A = nd::Tensor::zeros(B, action_dim_);
  nd::Tensor S2 = nd::Tensor::zeros(B, obs_dim_);
  std::vector<post::LatentGoal> zs(B);
  for (std::size_t b = 0; b < B; ++b) {
    VGCRL_CHECK(batch[b].a.size() == action_dim_, "sac update: action dim mismatch");
    for (std::size_t j = 0; j < action_dim_; ++j) A.at(b, j) = batch[b].a[j];
    for (std::size_t j = 0; j < obs_dim_; ++j) S2.at(b, j) = batch[b].s2[j];
    zs[b] = batch[b].z;
  }

  // Rewards are recomputed every update from the current discriminator.
  const std::vector<double> rewards = post::intrinsic_reward_batch(posterior, prior, zs, S2);

  SacLosses out;
  double reward_sum = 0.0;
  for (double r : rewards) reward_sum += r;
  out.mean_reward = reward_sum / static_cast<double>(B);

  // TD targets from the frozen target critics.
  nd::Tensor y = nd::Tensor::zeros(B, 1);
  {
    nd::Tensor mu2, ls2;
    policy_values(X2, mu2, ls2);
    nd::Tensor xa2 = nd::Tensor::zeros(B, X2.cols() + action_dim_);
    std::vector<double> logpi2(B, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t j = 0; j < X2.cols(); ++j) xa2.at(b, j) = X2.at(b, j);
      for (std::size_t j = 0; j < action_dim_; ++j) {
        const double eps = rng.normal();
        const double sig = std::exp(ls2.at(b, j));
        const double u = mu2.at(b, j) + sig * eps;
        const double a = std::tanh(u);
        xa2.at(b, X2.cols() + j) = a;
        logpi2[b] += -0.5 * eps * eps - ls2.at(b, j) - 0.5 * kLog2Pi -
                     std::log(1.0 - a * a + kSquashEps);
      }
    }
    const nd::Tensor q1t = q1_target_.forward_values(xa2);
    const nd::Tensor q2t = q2_target_.forward_values(xa2);
    for (std::size_t b = 0; b < B; ++b) {
      const double qmin = std::min(q1t[b], q2t[b]);
      const double not_terminal = batch[b].done ? 0.0 : 1.0;
      y[b] = rewards[b] + config_.gamma * not_terminal * (qmin - alpha_now * logpi2[b]);
    }
  }

  // Critic regression.
  {
    nd::Graph g;
    nd::Tensor xa = nd::Tensor::zeros(B, X.cols() + action_dim_);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t j = 0; j < X.cols(); ++j) xa.at(b, j) = X.at(b, j);
      for (std::size_t j = 0; j < action_dim_; ++j) xa.at(b, X.cols() + j) = A.at(b, j);
    }
    nd::Var xav = g.constant(std::move(xa));
    nd::Var yv = g.constant(y);
    nd::Var l1 = g.mean_all(g.square(g.sub(q1_.forward(g, xav), yv)));
    nd::Var l2 = g.mean_all(g.square(g.sub(q2_.forward(g, xav), yv)));
    nd::Var lq = g.add(l1, l2);
    out.q1 = g.scalar_value(l1);
    out.q2 = g.scalar_value(l2);
    VGCRL_CHECK(std::isfinite(out.q1) && std::isfinite(out.q2),
                "sac update: non-finite critic loss (q1=", out.q1, ", q2=", out.q2, ")");
    q1_opt_.zero_grad();
    q2_opt_.zero_grad();
    g.backward(lq);
    q1_opt_.step();
    q2_opt_.step();
    q1_opt_.zero_grad();
    q2_opt_.zero_grad();
  }

  // Reparameterized policy step.
  {
    nd::Graph g;
    nd::Var xc = g.constant(X);
    PolicyOut pol = policy_forward(g, xc);
    nd::Tensor eps = nd::Tensor::zeros(B, action_dim_);
    for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
    nd::Var u = g.add(pol.mu, g.mul(g.exp(pol.log_sigma), g.constant(std::move(eps))));
    nd::Var a = g.tanh(u);
    nd::Var standardized = g.mul(g.sub(u, pol.mu), g.exp(g.neg(pol.log_sigma)));
    nd::Var gauss_terms =
        g.sub(g.scale(g.square(standardized), -0.5), pol.log_sigma);
    nd::Var base = g.add_const(g.sum_cols(gauss_terms),
                               -0.5 * static_cast<double>(action_dim_) * kLog2Pi);
    nd::Var corr =
        g.sum_cols(g.log(g.add_const(g.neg(g.square(a)), 1.0 + kSquashEps)));
    nd::Var log_pi = g.sub(base, corr);
    nd::Var xa = g.concat_cols(xc, a);
    nd::Var qmin = g.min_elem(q1_.forward(g, xa), q2_.forward(g, xa));
    nd::Var lp = g.mean_all(g.sub(g.scale(log_pi, alpha_now), qmin));
    out.policy = g.scalar_value(lp);
    VGCRL_CHECK(std::isfinite(out.policy), "sac update: non-finite policy loss");
    double lp_sum = 0.0;
    const nd::Tensor& lp_vals = g.value(log_pi);
    for (std::size_t b = 0; b < B; ++b) lp_sum += lp_vals[b];
    out.mean_log_pi = lp_sum / static_cast<double>(B);
    double q_sum = 0.0;
    const nd::Tensor& q_vals = g.value(qmin);
    for (std::size_t b = 0; b < B; ++b) q_sum += q_vals[b];
    out.mean_q = q_sum / static_cast<double>(B);

    policy_opt_.zero_grad();
    g.backward(lp);
    policy_opt_.step();
    policy_opt_.zero_grad();
    // The actor pass also deposited gradients in the critics; discard them.
    q1_opt_.zero_grad();
    q2_opt_.zero_grad();
  }

  // Temperature.
  if (config_.alpha < 0.0) {
    const double grad = -(out.mean_log_pi + target_entropy_);
    VGCRL_CHECK(std::isfinite(grad), "sac update: non-finite temperature gradient");
    alpha_opt_.zero_grad();
    log_alpha_.grad[0] = grad;
    alpha_opt_.step();
    alpha_opt_.zero_grad();
    out.alpha = -log_alpha_.value[0] * (out.mean_log_pi + target_entropy_);
  }
  out.alpha_value = alpha();

  // Polyak targets.
  {
    auto sync = [&](nd::Mlp& online, nd::Mlp& target) {
      auto po = online.parameters();
      auto pt = target.parameters();
      for (std::size_t i = 0; i < po.size(); ++i)
        kern::active().lerp(config_.tau, po[i]->value.data(), pt[i]->value.data(),
                            po[i]->value.size());
    };
    sync(q1_, q1_target_);
    sync(q2_, q2_target_);
  }
  return out;
}

std::vector<nd::Parameter*> SacAgent::parameters() {
  std::vector<nd::Parameter*> out = policy_trunk_.parameters();
  for (auto* p : policy_mu_.parameters()) out.push_back(p);
  for (auto* p : policy_log_sigma_.parameters()) out.push_back(p);
  for (nd::Mlp* net : {&q1_, &q2_, &q1_target_, &q2_target_})
    for (auto* p : net->parameters()) out.push_back(p);
  out.push_back(&log_alpha_);
  return out;
}

std::vector<std::pair<nd::Parameter*, nd::AdamState*>> SacAgent::optimizer_slots() {
  std::vector<std::pair<nd::Parameter*, nd::AdamState*>> out;
  for (nd::AdamOptimizer* opt : {&policy_opt_, &q1_opt_, &q2_opt_, &alpha_opt_})
    for (auto& slot : opt->slots()) out.push_back(slot);
  return out;
}

std::function<std::vector<double>(std::span<const double>, const post::LatentGoal&)>
SacAgent::deterministic_policy() const {
  return [this](std::span<const double> obs, const post::LatentGoal& z) {
    Rng unused(0);
    return act(obs, z, /*deterministic=*/true, unused);
  };
}

}  // namespace vgcrl::rl
