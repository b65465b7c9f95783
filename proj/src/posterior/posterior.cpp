#include "vgcrl/posterior/posterior.hpp"

#include <algorithm>
#include <cmath>

namespace vgcrl::post {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kSquashEdge = 1.0 - 1e-12;

// Squash correction column: sum_i log(1 - z_i^2), subtracted from the base
// log-density when the tanh bijector is active.
nd::Tensor squash_correction(const std::vector<LatentGoal>& zs) {
  nd::Tensor out = nd::Tensor::zeros(zs.size(), 1);
  for (std::size_t b = 0; b < zs.size(); ++b) {
    double s = 0.0;
    for (double zi : zs[b].vec()) s += std::log1p(-zi * zi);
    out[b] = s;
  }
  return out;
}

nd::Tensor goals_tensor(const std::vector<LatentGoal>& zs, std::size_t dim, bool squash,
                        bool pre_squash_space) {
  nd::Tensor out = nd::Tensor::zeros(zs.size(), dim);
  for (std::size_t b = 0; b < zs.size(); ++b) {
    const LatentGoal& z = zs[b];
    VGCRL_CHECK(!z.is_discrete(), "posterior: expected continuous goal in batch row ", b);
    VGCRL_CHECK(z.vec().size() == dim, "posterior: goal dim ", z.vec().size(),
                " vs expected ", dim, " in batch row ", b);
    for (std::size_t j = 0; j < dim; ++j) {
      double v = z.vec()[j];
      if (squash) {
        VGCRL_CHECK(std::abs(v) < 1.0, "posterior: |z_", j, "| >= 1 under tanh squashing (z=",
                    v, ")");
        if (pre_squash_space) v = std::atanh(v);
      }
      out.at(b, j) = v;
    }
  }
  return out;
}

double squash_value(double u) { return std::clamp(std::tanh(u), -kSquashEdge, kSquashEdge); }

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::fixed_gaussian: return "fixed_gaussian";
    case Family::adaptive_gaussian: return "adaptive_gaussian";
    case Family::linear_gaussian: return "linear_gaussian";
    case Family::mlp_gaussian: return "mlp_gaussian";
    case Family::categorical: return "categorical";
    case Family::gmm: return "gmm";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  for (Family f : {Family::fixed_gaussian, Family::adaptive_gaussian, Family::linear_gaussian,
                   Family::mlp_gaussian, Family::categorical, Family::gmm})
    if (name == family_name(f)) return f;
  fail("posterior: unknown family '", name, "'");
}

void PosteriorConfig::validate() const {
  VGCRL_CHECK(goal_dim >= 1, "posterior: goal_dim must be >= 1");
  VGCRL_CHECK(obs_dim >= 1, "posterior: obs_dim must be >= 1");
  VGCRL_CHECK(sigma_fixed > 0.0, "posterior: sigma must be > 0, got ", sigma_fixed);
  VGCRL_CHECK(log_sigma_min <= log_sigma_max, "posterior: log-sigma clip range inverted");
  VGCRL_CHECK(gmm_components >= 1, "posterior: gmm_components must be >= 1");
  VGCRL_CHECK(spectral_coeff >= 0.0, "posterior: spectral_norm must be >= 0");
  for (std::size_t i : state_slice)
    VGCRL_CHECK(i < obs_dim, "posterior: state_slice index ", i, " out of range for obs_dim ",
                obs_dim);
  if (family == Family::fixed_gaussian || family == Family::adaptive_gaussian)
    VGCRL_CHECK(slice_dim() == goal_dim, "posterior: identity mean needs slice dim (",
                slice_dim(), ") == goal_dim (", goal_dim, ")");
}

void Posterior::init_optimizer() { opt_ = nd::AdamOptimizer(parameters(), config_.adam); }

nd::Tensor Posterior::slice_states(const nd::Tensor& states) const {
  VGCRL_CHECK(states.cols() == config_.obs_dim, "posterior: observation width ",
              states.cols(), " vs configured obs_dim ", config_.obs_dim);
  if (config_.state_slice.empty()) return states;
  nd::Tensor out = nd::Tensor::zeros(states.rows(), config_.state_slice.size());
  for (std::size_t i = 0; i < states.rows(); ++i)
    for (std::size_t j = 0; j < config_.state_slice.size(); ++j)
      out.at(i, j) = states.at(i, config_.state_slice[j]);
  return out;
}

std::vector<double> Posterior::log_prob_values(const nd::Tensor& states,
                                               const std::vector<LatentGoal>& zs) const {
  nd::Graph g;
  nd::Var lp = log_prob_batch(g, states, zs);
  const nd::Tensor& v = g.value(lp);
  return {v.values().begin(), v.values().end()};
}

double Posterior::log_prob(const LatentGoal& z, std::span<const double> obs) const {
  nd::Tensor s = nd::Tensor::row({obs.begin(), obs.end()});
  return log_prob_values(s, {z})[0];
}

double Posterior::fit_discriminator_step(const std::vector<LatentGoal>& zs,
                                         const nd::Tensor& states) {
  VGCRL_CHECK(!zs.empty(), "fit_discriminator_step: empty batch");
  VGCRL_CHECK(states.rows() == zs.size(), "fit_discriminator_step: ", states.rows(),
              " states vs ", zs.size(), " goals");
  nd::Graph g;
  nd::Var loss = g.neg(g.mean_all(log_prob_batch(g, states, zs)));
  const double value = g.scalar_value(loss);
  VGCRL_CHECK(std::isfinite(value), "fit_discriminator_step: non-finite loss");
  if (opt_.num_params() > 0) {
    opt_.zero_grad();
    g.backward(loss);
    opt_.step();
    project_parameters();
  }
  return value;
}

double intrinsic_reward(const Posterior& q, const Prior& p, const LatentGoal& z,
                        std::span<const double> obs) {
  return q.log_prob(z, obs) - p.log_density(z);
}

std::vector<double> intrinsic_reward_batch(const Posterior& q, const Prior& p,
                                           const std::vector<LatentGoal>& zs,
                                           const nd::Tensor& states) {
  std::vector<double> r = q.log_prob_values(states, zs);
  for (std::size_t b = 0; b < zs.size(); ++b) r[b] -= p.log_density(zs[b]);
  return r;
}

// ---------------------------------------------------------------------------
// Gaussian family: fixed / adaptive / linear / mlp means and variances.

class GaussianPosterior final : public Posterior {
 public:
  GaussianPosterior(PosteriorConfig config, std::uint64_t seed) : Posterior(std::move(config)) {
    Rng init(derive_seed(seed, 0x60A1));
    const std::size_t sd = config_.slice_dim();
    const std::size_t d = config_.goal_dim;
    switch (config_.family) {
      case Family::fixed_gaussian:
        break;
      case Family::adaptive_gaussian:
        log_sigma_ = nd::Parameter(
            "posterior.log_sigma",
            nd::Tensor::full(1, d, std::clamp(std::log(config_.sigma_fixed),
                                              config_.log_sigma_min, config_.log_sigma_max)));
        break;
      case Family::linear_gaussian: {
        nd::Tensor a = nd::Tensor::zeros(sd, d);
        const double s = std::sqrt(1.0 / static_cast<double>(sd));
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = s * init.normal();
        lin_map_ = nd::Parameter("posterior.A", std::move(a));
        break;
      }
      case Family::mlp_gaussian: {
        if (!config_.hidden_dims.empty()) {
          nd::MlpSpec trunk_spec{config_.obs_dim, {}, config_.activation, 1};
          trunk_spec.input_dim = sd;
          trunk_spec.hidden_dims.assign(config_.hidden_dims.begin(),
                                        config_.hidden_dims.end() - 1);
          trunk_spec.output_dim = config_.hidden_dims.back();
          trunk_.emplace("posterior.trunk", trunk_spec, init, /*activate_output=*/true);
        }
        const std::size_t feat = config_.hidden_dims.empty() ? sd : config_.hidden_dims.back();
        mu_head_.emplace("posterior.mu", feat, d, init, nd::InitKind::zero);
        logsig_head_.emplace("posterior.log_sigma", feat, d, init, nd::InitKind::zero);
        if (config_.spectral_coeff > 0.0) {
          if (trunk_) trunk_->enable_spectral_norm(config_.spectral_coeff);
          mu_head_->enable_spectral_norm(config_.spectral_coeff);
          logsig_head_->enable_spectral_norm(config_.spectral_coeff);
        }
        break;
      }
      default:
        fail("GaussianPosterior: wrong family");
    }
    init_optimizer();
  }

  nd::Var log_prob_batch(nd::Graph& g, const nd::Tensor& states,
                         const std::vector<LatentGoal>& zs) const override {
    const std::size_t d = config_.goal_dim;
    nd::Tensor u = goals_tensor(zs, d, config_.squash, /*pre_squash_space=*/true);
    const nd::Tensor x = slice_states(states);
    const std::size_t batch = x.rows();

    nd::Var mu = mean_var(g, x);
    nd::Var log_sigma = log_sigma_var(g, x, batch);

    nd::Var diff = g.sub(g.constant(std::move(u)), mu);
    nd::Var standardized = g.mul(diff, g.exp(g.neg(log_sigma)));
    nd::Var terms = g.sub(g.scale(g.square(standardized), -0.5), log_sigma);
    nd::Var base = g.add_const(g.sum_cols(terms),
                               -0.5 * static_cast<double>(d) * kLog2Pi);
    if (!config_.squash) return base;
    return g.sub(base, g.constant(squash_correction(zs)));
  }

  LatentGoal sample(std::span<const double> obs, Rng& rng) const override {
    const auto [mu, sigma] = moments(obs);
    std::vector<double> z(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double u = mu[j] + sigma[j] * rng.normal();
      z[j] = config_.squash ? squash_value(u) : u;
    }
    return LatentGoal::continuous(std::move(z));
  }

  LatentGoal mode(std::span<const double> obs) const override {
    auto [mu, sigma] = moments(obs);
    if (config_.squash)
      for (double& m : mu) m = squash_value(m);
    return LatentGoal::continuous(std::move(mu));
  }

  std::vector<nd::Parameter*> parameters() override {
    std::vector<nd::Parameter*> out;
    if (config_.family == Family::adaptive_gaussian) out.push_back(&log_sigma_);
    if (config_.family == Family::linear_gaussian) out.push_back(&lin_map_);
    if (config_.family == Family::mlp_gaussian) {
      if (trunk_)
        for (auto* p : trunk_->parameters()) out.push_back(p);
      for (auto* p : mu_head_->parameters()) out.push_back(p);
      for (auto* p : logsig_head_->parameters()) out.push_back(p);
    }
    return out;
  }

  void project_parameters() override {
    if (config_.family != Family::adaptive_gaussian) return;
    for (std::size_t i = 0; i < log_sigma_.value.size(); ++i)
      log_sigma_.value[i] =
          std::clamp(log_sigma_.value[i], config_.log_sigma_min, config_.log_sigma_max);
  }

  Diagnostics describe() const override {
    Diagnostics d;
    d.fields["sigma"] = sigma_snapshot();
    if (config_.family == Family::linear_gaussian)
      d.fields["A"] = {lin_map_.value.values().begin(), lin_map_.value.values().end()};
    if (config_.family == Family::mlp_gaussian && config_.spectral_coeff > 0.0) {
      std::vector<double> sn;
      if (trunk_)
        for (double s : trunk_->spectral_sigmas()) sn.push_back(s);
      sn.push_back(mu_head_->last_sigma());
      sn.push_back(logsig_head_->last_sigma());
      d.fields["sn_sigma"] = std::move(sn);
    }
    return d;
  }

  const nd::Tensor& linear_map() const { return lin_map_.value; }

 private:
  nd::Var mean_var(nd::Graph& g, const nd::Tensor& x) const {
    switch (config_.family) {
      case Family::fixed_gaussian:
      case Family::adaptive_gaussian:
        return g.constant(x);
      case Family::linear_gaussian:
        return g.matmul(g.constant(x), g.leaf(const_cast<nd::Parameter&>(lin_map_)));
      case Family::mlp_gaussian: {
        nd::Var feat = g.constant(x);
        if (trunk_) feat = trunk_->forward(g, feat);
        return mu_head_->forward(g, feat);
      }
      default:
        fail("GaussianPosterior: wrong family");
    }
  }

  nd::Var log_sigma_var(nd::Graph& g, const nd::Tensor& x, std::size_t batch) const {
    switch (config_.family) {
      case Family::fixed_gaussian:
      case Family::linear_gaussian:
        return g.constant(
            nd::Tensor::full(batch, config_.goal_dim, std::log(config_.sigma_fixed)));
      case Family::adaptive_gaussian:
        return g.broadcast_rows(g.leaf(const_cast<nd::Parameter&>(log_sigma_)), batch);
      case Family::mlp_gaussian: {
        nd::Var feat = g.constant(x);
        if (trunk_) feat = trunk_->forward(g, feat);
        return g.clamp(logsig_head_->forward(g, feat), config_.log_sigma_min,
                       config_.log_sigma_max);
      }
      default:
        fail("GaussianPosterior: wrong family");
    }
  }

  // (mu, sigma) for a single observation, on the values path.
  std::pair<std::vector<double>, std::vector<double>> moments(
      std::span<const double> obs) const {
    nd::Tensor s = nd::Tensor::row({obs.begin(), obs.end()});
    const nd::Tensor x = slice_states(s);
    const std::size_t d = config_.goal_dim;
    std::vector<double> mu(d, 0.0), sigma(d, config_.sigma_fixed);
    switch (config_.family) {
      case Family::fixed_gaussian:
      case Family::adaptive_gaussian:
        for (std::size_t j = 0; j < d; ++j) mu[j] = x[j];
        if (config_.family == Family::adaptive_gaussian)
          for (std::size_t j = 0; j < d; ++j) sigma[j] = std::exp(log_sigma_.value[j]);
        break;
      case Family::linear_gaussian:
        for (std::size_t j = 0; j < d; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < x.cols(); ++i) acc += x[i] * lin_map_.value.at(i, j);
          mu[j] = acc;
        }
        break;
      case Family::mlp_gaussian: {
        nd::Tensor feat = trunk_ ? trunk_->forward_values(x) : x;
        const nd::Tensor m = mu_head_->forward_values(feat);
        const nd::Tensor ls = logsig_head_->forward_values(feat);
        for (std::size_t j = 0; j < d; ++j) {
          mu[j] = m[j];
          sigma[j] =
              std::exp(std::clamp(ls[j], config_.log_sigma_min, config_.log_sigma_max));
        }
        break;
      }
      default:
        fail("GaussianPosterior: wrong family");
    }
    return {std::move(mu), std::move(sigma)};
  }

  std::vector<double> sigma_snapshot() const {
    std::vector<double> out(config_.goal_dim, config_.sigma_fixed);
    if (config_.family == Family::adaptive_gaussian)
      for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::exp(log_sigma_.value[j]);
    return out;
  }

  nd::Parameter log_sigma_;  // adaptive: [1, d]
  nd::Parameter lin_map_;    // linear: [slice_dim, d]
  std::optional<nd::Mlp> trunk_;
  mutable std::optional<nd::LinearLayer> mu_head_, logsig_head_;
};

// ---------------------------------------------------------------------------
// Categorical family (discrete skills).

class CategoricalPosterior final : public Posterior {
 public:
  CategoricalPosterior(PosteriorConfig config, std::uint64_t seed)
      : Posterior(std::move(config)),
        net_([&] {
          Rng init(derive_seed(seed, 0x60A1));
          nd::MlpSpec spec{config_.slice_dim(), config_.hidden_dims, config_.activation,
                           config_.goal_dim};
          return nd::Mlp("posterior.net", spec, init);
        }()) {
    if (config_.spectral_coeff > 0.0) net_.enable_spectral_norm(config_.spectral_coeff);
    init_optimizer();
  }

  nd::Var log_prob_batch(nd::Graph& g, const nd::Tensor& states,
                         const std::vector<LatentGoal>& zs) const override {
    std::vector<int> idx(zs.size());
    for (std::size_t b = 0; b < zs.size(); ++b) {
      VGCRL_CHECK(zs[b].is_discrete(), "categorical posterior: continuous goal in row ", b);
      VGCRL_CHECK(zs[b].index() < static_cast<int>(config_.goal_dim),
                  "categorical posterior: index ", zs[b].index(), " out of range |G|=",
                  config_.goal_dim);
      idx[b] = zs[b].index();
    }
    nd::Var logits = net_.forward(g, g.constant(slice_states(states)));
    nd::Var lsm = g.sub_colvec(logits, logsumexp_cols(g, logits));
    return g.gather_cols(lsm, std::move(idx));
  }

  LatentGoal sample(std::span<const double> obs, Rng& rng) const override {
    const std::vector<double> p = probabilities(obs);
    double r = rng.uniform01();
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      r -= p[k];
      if (r < 0.0) return LatentGoal::discrete(static_cast<int>(k));
    }
    return LatentGoal::discrete(static_cast<int>(p.size()) - 1);
  }

  LatentGoal mode(std::span<const double> obs) const override {
    const nd::Tensor logits = logits_values(obs);
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k)
      if (logits[k] > logits[best]) best = k;
    return LatentGoal::discrete(static_cast<int>(best));
  }

  std::vector<nd::Parameter*> parameters() override { return net_.parameters(); }

  Diagnostics describe() const override {
    Diagnostics d;
    if (config_.spectral_coeff > 0.0) d.fields["sn_sigma"] = net_.spectral_sigmas();
    return d;
  }

  std::vector<double> probabilities(std::span<const double> obs) const {
    const nd::Tensor logits = logits_values(obs);
    double mx = logits[0];
    for (std::size_t k = 1; k < logits.size(); ++k) mx = std::max(mx, logits[k]);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = std::exp(logits[k] - mx);
      sum += p[k];
    }
    for (double& x : p) x /= sum;
    return p;
  }

 private:
  nd::Tensor logits_values(std::span<const double> obs) const {
    nd::Tensor s = nd::Tensor::row({obs.begin(), obs.end()});
    return net_.forward_values(slice_states(s));
  }

  mutable nd::Mlp net_;
};

// ---------------------------------------------------------------------------
// Gaussian mixture family.

class GmmPosterior final : public Posterior {
 public:
  GmmPosterior(PosteriorConfig config, std::uint64_t seed) : Posterior(std::move(config)) {
    Rng init(derive_seed(seed, 0x60A1));
    const std::size_t sd = config_.slice_dim();
    const std::size_t kd = config_.gmm_components * config_.goal_dim;
    if (!config_.hidden_dims.empty()) {
      nd::MlpSpec trunk_spec{sd,
                             {config_.hidden_dims.begin(), config_.hidden_dims.end() - 1},
                             config_.activation,
                             config_.hidden_dims.back()};
      trunk_.emplace("posterior.trunk", trunk_spec, init, /*activate_output=*/true);
    }
    const std::size_t feat = config_.hidden_dims.empty() ? sd : config_.hidden_dims.back();
    mu_head_.emplace("posterior.mu", feat, kd, init, nd::InitKind::zero);
    logsig_head_.emplace("posterior.log_sigma", feat, kd, init, nd::InitKind::zero);
    weight_head_.emplace("posterior.mix", feat, config_.gmm_components, init,
                         nd::InitKind::zero);
    if (config_.spectral_coeff > 0.0) {
      if (trunk_) trunk_->enable_spectral_norm(config_.spectral_coeff);
      mu_head_->enable_spectral_norm(config_.spectral_coeff);
      logsig_head_->enable_spectral_norm(config_.spectral_coeff);
      weight_head_->enable_spectral_norm(config_.spectral_coeff);
    }
    init_optimizer();
  }

  nd::Var log_prob_batch(nd::Graph& g, const nd::Tensor& states,
                         const std::vector<LatentGoal>& zs) const override {
    const std::size_t d = config_.goal_dim;
    const std::size_t K = config_.gmm_components;
    nd::Tensor u = goals_tensor(zs, d, config_.squash, /*pre_squash_space=*/true);
    nd::Tensor tiled = nd::Tensor::zeros(u.rows(), K * d);
    for (std::size_t b = 0; b < u.rows(); ++b)
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < d; ++j) tiled.at(b, k * d + j) = u.at(b, j);

    nd::Var feat = g.constant(slice_states(states));
    if (trunk_) feat = trunk_->forward(g, feat);
    nd::Var mu = mu_head_->forward(g, feat);
    nd::Var log_sigma = g.clamp(logsig_head_->forward(g, feat), config_.log_sigma_min,
                                config_.log_sigma_max);
    nd::Var wlogits = weight_head_->forward(g, feat);

    nd::Var diff = g.sub(g.constant(std::move(tiled)), mu);
    nd::Var standardized = g.mul(diff, g.exp(g.neg(log_sigma)));
    nd::Var terms = g.sub(g.scale(g.square(standardized), -0.5), log_sigma);
    nd::Var comp = g.add_const(g.sum_colgroups(terms, d),
                               -0.5 * static_cast<double>(d) * kLog2Pi);  // [B,K]
    nd::Var wlog = g.sub_colvec(wlogits, logsumexp_cols(g, wlogits));
    nd::Var base = logsumexp_cols(g, g.add(comp, wlog));
    if (!config_.squash) return base;
    return g.sub(base, g.constant(squash_correction(zs)));
  }

  LatentGoal sample(std::span<const double> obs, Rng& rng) const override {
    const Heads h = heads_values(obs);
    const std::vector<double> w = softmax(h.wlogits);
    double r = rng.uniform01();
    std::size_t pick = w.size() - 1;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
      r -= w[k];
      if (r < 0.0) {
        pick = k;
        break;
      }
    }
    const std::size_t d = config_.goal_dim;
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double u = h.mu[pick * d + j] + h.sigma[pick * d + j] * rng.normal();
      z[j] = config_.squash ? squash_value(u) : u;
    }
    return LatentGoal::continuous(std::move(z));
  }

  LatentGoal mode(std::span<const double> obs) const override {
    const Heads h = heads_values(obs);
    const std::vector<double> w = softmax(h.wlogits);
    // Highest-weight component; density at the candidate means breaks ties.
    std::vector<std::size_t> best = {0};
    for (std::size_t k = 1; k < w.size(); ++k) {
      if (w[k] > w[best[0]] + 1e-12) {
        best = {k};
      } else if (std::abs(w[k] - w[best[0]]) <= 1e-12) {
        best.push_back(k);
      }
    }
    std::size_t pick = best[0];
    if (best.size() > 1) {
      double best_lp = -1e300;
      for (std::size_t k : best) {
        const LatentGoal cand = component_mean_goal(h, k);
        const double lp = log_prob(cand, obs);
        if (lp > best_lp) {
          best_lp = lp;
          pick = k;
        }
      }
    }
    return component_mean_goal(h, pick);
  }

  LatentGoal expectation(std::span<const double> obs) const override {
    const Heads h = heads_values(obs);
    const std::vector<double> w = softmax(h.wlogits);
    const std::size_t d = config_.goal_dim;
    std::vector<double> m(d, 0.0);
    for (std::size_t k = 0; k < w.size(); ++k)
      for (std::size_t j = 0; j < d; ++j) m[j] += w[k] * h.mu[k * d + j];
    if (config_.squash)
      for (double& x : m) x = squash_value(x);
    return LatentGoal::continuous(std::move(m));
  }

  std::vector<nd::Parameter*> parameters() override {
    std::vector<nd::Parameter*> out;
    if (trunk_)
      for (auto* p : trunk_->parameters()) out.push_back(p);
    for (auto* h : {&*mu_head_, &*logsig_head_, &*weight_head_})
      for (auto* p : h->parameters()) out.push_back(p);
    return out;
  }

  Diagnostics describe() const override {
    Diagnostics d;
    if (config_.spectral_coeff > 0.0) {
      std::vector<double> sn;
      if (trunk_)
        for (double s : trunk_->spectral_sigmas()) sn.push_back(s);
      for (auto* h : {&*mu_head_, &*logsig_head_, &*weight_head_})
        sn.push_back(h->last_sigma());
      d.fields["sn_sigma"] = std::move(sn);
    }
    return d;
  }

 private:
  struct Heads {
    std::vector<double> mu, sigma, wlogits;
  };

  Heads heads_values(std::span<const double> obs) const {
    nd::Tensor s = nd::Tensor::row({obs.begin(), obs.end()});
    nd::Tensor feat = slice_states(s);
    if (trunk_) feat = trunk_->forward_values(feat);
    const nd::Tensor m = mu_head_->forward_values(feat);
    const nd::Tensor ls = logsig_head_->forward_values(feat);
    const nd::Tensor w = weight_head_->forward_values(feat);
    Heads h;
    h.mu = {m.values().begin(), m.values().end()};
    h.sigma.resize(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i)
      h.sigma[i] = std::exp(std::clamp(ls[i], config_.log_sigma_min, config_.log_sigma_max));
    h.wlogits = {w.values().begin(), w.values().end()};
    return h;
  }

  static std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double x : logits) mx = std::max(mx, x);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = std::exp(logits[i] - mx);
      sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
  }

  LatentGoal component_mean_goal(const Heads& h, std::size_t k) const {
    const std::size_t d = config_.goal_dim;
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double m = h.mu[k * d + j];
      z[j] = config_.squash ? squash_value(m) : m;
    }
    return LatentGoal::continuous(std::move(z));
  }

  std::optional<nd::Mlp> trunk_;
  mutable std::optional<nd::LinearLayer> mu_head_, logsig_head_, weight_head_;
};

std::unique_ptr<Posterior> make_posterior(const PosteriorConfig& config, std::uint64_t seed) {
  config.validate();
  switch (config.family) {
    case Family::fixed_gaussian:
    case Family::adaptive_gaussian:
    case Family::linear_gaussian:
    case Family::mlp_gaussian:
      return std::make_unique<GaussianPosterior>(config, seed);
    case Family::categorical:
      return std::make_unique<CategoricalPosterior>(config, seed);
    case Family::gmm:
      return std::make_unique<GmmPosterior>(config, seed);
  }
  fail("make_posterior: unknown family");
}

}  // namespace vgcrl::post
