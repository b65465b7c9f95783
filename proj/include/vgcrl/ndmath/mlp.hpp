#pragma once

#include <string>
#include <vector>

#include "vgcrl/ndmath/graph.hpp"
#include "vgcrl/ndmath/spectral.hpp"
#include "vgcrl/rng.hpp"

namespace vgcrl::nd {

enum class Activation { relu, tanh };

struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims;
  Activation activation = Activation::relu;
  std::size_t output_dim = 1;

  void validate() const {
    VGCRL_CHECK(input_dim >= 1 && output_dim >= 1, "MlpSpec: dims must be >= 1");
    for (std::size_t h : hidden_dims) VGCRL_CHECK(h >= 1, "MlpSpec: hidden dim must be >= 1");
  }
};

enum class InitKind { he, glorot, zero };

// Affine layer with an optional spectral constraint on the weight. When the
// constraint is on, every forward (graph or values) advances the warm power
// basis by one sweep and evaluates with coeff * W / sigma; the raw W stays
// the trainable parameter.
class LinearLayer {
 public:
  LinearLayer(const std::string& name, std::size_t in, std::size_t out, Rng& init,
              InitKind kind);

  Var forward(Graph& g, Var x) const;
  Tensor forward_values(const Tensor& x) const;

  void enable_spectral_norm(double coeff);
  bool spectral_norm_enabled() const { return sn_coeff_ > 0.0; }
  double last_sigma() const { return sn_sigma_; }
  // Effective weight exactly as a forward pass would use it (advances the basis).
  Tensor effective_weight() const;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  std::vector<Parameter*> parameters();

  std::size_t in_dim() const { return weight_.value.rows(); }
  std::size_t out_dim() const { return weight_.value.cols(); }

 private:
  Parameter weight_;  // [in, out]
  Parameter bias_;    // [1, out]
  double sn_coeff_ = 0.0;
  mutable SpectralState sn_state_;
  mutable double sn_sigma_ = 0.0;
};

// Plain fully-connected stack per MlpSpec. `activate_output` turns the final
// layer into another hidden layer (used for trunks that feed linear heads).
// Hidden weights use the activation's usual init; the output layer is
// zero-initialized so freshly built heads are exactly uniform/zero.
class Mlp {
 public:
  Mlp(const std::string& name, const MlpSpec& spec, Rng& init, bool activate_output = false,
      InitKind output_init = InitKind::zero);

  Var forward(Graph& g, Var x) const;
  Tensor forward_values(const Tensor& x) const;

  void enable_spectral_norm(double coeff);
  std::vector<double> spectral_sigmas() const;

  std::vector<Parameter*> parameters();
  const MlpSpec& spec() const { return spec_; }
  LinearLayer& layer(std::size_t i) { return layers_[i]; }
  std::size_t num_layers() const { return layers_.size(); }

 private:
  Var activate(Graph& g, Var x) const;
  Tensor activate_values(Tensor x) const;

  MlpSpec spec_;
  std::vector<LinearLayer> layers_;
  bool activate_output_ = false;
};

}  // namespace vgcrl::nd
