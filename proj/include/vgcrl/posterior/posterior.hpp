#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vgcrl/ndmath/adam.hpp"
#include "vgcrl/ndmath/mlp.hpp"
#include "vgcrl/posterior/latent.hpp"

namespace vgcrl::post {

enum class Family {
  fixed_gaussian,     // N(slice(s), sigma^2 I), nothing learnable
  adaptive_gaussian,  // N(slice(s), diag(sigma)^2), global log-sigma learned
  linear_gaussian,    // N(A slice(s), sigma^2 I), A learned
  mlp_gaussian,       // N(mu(s), diag(sigma(s))^2), MLP trunk + heads
  categorical,        // softmax(logits(s)) over |G| skills
  gmm,                // K-component diagonal Gaussian mixture from MLP heads
};

const char* family_name(Family f);
Family family_from_name(const std::string& name);

struct PosteriorConfig {
  Family family = Family::categorical;
  std::size_t goal_dim = 2;           // |G| for categorical, d otherwise
  std::size_t obs_dim = 0;            // full observation width
  std::vector<std::size_t> state_slice;  // obs dims fed to the discriminator; empty = all
  double sigma_fixed = 1.0;
  bool squash = false;                // tanh bijector on the continuous density
  double log_sigma_min = std::log(0.3);
  double log_sigma_max = std::log(10.0);
  std::size_t gmm_components = 8;
  double spectral_coeff = 0.0;        // 0 = off
  std::vector<std::size_t> hidden_dims = {128, 128};
  nd::Activation activation = nd::Activation::relu;
  nd::AdamConfig adam;

  std::size_t slice_dim() const { return state_slice.empty() ? obs_dim : state_slice.size(); }
  void validate() const;
};

// Read-only snapshot of whatever the family learned (per-dim sigmas, the
// linear map, spectral-norm estimates). Keys are family-specific.
struct Diagnostics {
  std::map<std::string, std::vector<double>> fields;
};

// The variational posterior q(z|s). One instance is owned and mutated by the
// trainer thread; evaluation entry points are const apart from the warm
// spectral-norm buffers.
class Posterior {
 public:
  virtual ~Posterior() = default;

  // [B,1] log q(z_b | s_b) as a differentiable graph expression. States are
  // full observations; slicing happens inside.
  virtual nd::Var log_prob_batch(nd::Graph& g, const nd::Tensor& states,
                                 const std::vector<LatentGoal>& zs) const = 0;

  virtual LatentGoal sample(std::span<const double> obs, Rng& rng) const = 0;
  virtual LatentGoal mode(std::span<const double> obs) const = 0;
  // Posterior expectation of z given s (equals mode for unimodal families;
  // mixture mean for GMM; argmax for categorical).
  virtual LatentGoal expectation(std::span<const double> obs) const { return mode(obs); }

  virtual std::vector<nd::Parameter*> parameters() = 0;
  // Projection applied after optimizer steps (log-sigma clipping).
  virtual void project_parameters() {}
  virtual Diagnostics describe() const = 0;

  const PosteriorConfig& config() const { return config_; }

  // Value-only conveniences built on log_prob_batch.
  std::vector<double> log_prob_values(const nd::Tensor& states,
                                      const std::vector<LatentGoal>& zs) const;
  double log_prob(const LatentGoal& z, std::span<const double> obs) const;

  // One Adam step minimizing -mean log q(z|s). Returns the loss. Families
  // with nothing learnable still report the loss but change no parameters.
  double fit_discriminator_step(const std::vector<LatentGoal>& zs, const nd::Tensor& states);

  nd::AdamOptimizer& optimizer() { return opt_; }

 protected:
  explicit Posterior(PosteriorConfig config) : config_(std::move(config)) {}
  void init_optimizer();
  nd::Tensor slice_states(const nd::Tensor& states) const;
  PosteriorConfig config_;
  nd::AdamOptimizer opt_;
};

std::unique_ptr<Posterior> make_posterior(const PosteriorConfig& config, std::uint64_t seed);

// log q - log p, recomputed from the live posterior (the intrinsic reward).
double intrinsic_reward(const Posterior& q, const Prior& p, const LatentGoal& z,
                        std::span<const double> obs);
std::vector<double> intrinsic_reward_batch(const Posterior& q, const Prior& p,
                                           const std::vector<LatentGoal>& zs,
                                           const nd::Tensor& states);

}  // namespace vgcrl::post
