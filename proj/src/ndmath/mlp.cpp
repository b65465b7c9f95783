#include "vgcrl/ndmath/mlp.hpp"

#include <cmath>

#include "vgcrl/kernels/kernels.hpp"

namespace vgcrl::nd {

LinearLayer::LinearLayer(const std::string& name, std::size_t in, std::size_t out, Rng& init,
                         InitKind kind)
    : weight_(name + ".W", Tensor::zeros(in, out)),
      bias_(name + ".b", Tensor::zeros(1, out)) {
  if (kind == InitKind::he) {
    const double s = std::sqrt(2.0 / static_cast<double>(in));
    for (std::size_t i = 0; i < weight_.value.size(); ++i) weight_.value[i] = s * init.normal();
  } else if (kind == InitKind::glorot) {
    const double s = std::sqrt(1.0 / static_cast<double>(in));
    for (std::size_t i = 0; i < weight_.value.size(); ++i) weight_.value[i] = s * init.normal();
  }
}

void LinearLayer::enable_spectral_norm(double coeff) {
  VGCRL_CHECK(coeff > 0.0, "spectral norm coefficient must be > 0, got ", coeff);
  sn_coeff_ = coeff;
  // Converge the estimate once up front; per-forward single sweeps only have
  // to track slow weight drift afterwards.
  double prev = -1.0;
  for (int round = 0; round < 4000; ++round) {
    sn_sigma_ = spectral_norm_step(weight_.value, sn_state_, 1).sigma_max;
    if (round >= 8 && std::abs(sn_sigma_ - prev) <= 1e-14 * std::max(sn_sigma_, 1e-300)) break;
    prev = sn_sigma_;
  }
}

Tensor LinearLayer::effective_weight() const {
  if (sn_coeff_ <= 0.0) return weight_.value;
  sn_sigma_ = spectral_norm_step(weight_.value, sn_state_, 1).sigma_max;
  if (sn_sigma_ < 1e-12) return weight_.value;
  Tensor out = Tensor::zeros(weight_.value.rows(), weight_.value.cols());
  kern::active().scale(sn_coeff_ / sn_sigma_, weight_.value.data(), out.data(),
                       weight_.value.size());
  return out;
}

Var LinearLayer::forward(Graph& g, Var x) const {
  Var w = g.leaf(const_cast<Parameter&>(weight_));
  if (sn_coeff_ > 0.0) {
    sn_sigma_ = spectral_norm_step(weight_.value, sn_state_, 1).sigma_max;
    if (sn_sigma_ >= 1e-12) w = g.scale(w, sn_coeff_ / sn_sigma_);
  }
  return g.add_rowvec(g.matmul(x, w), g.leaf(const_cast<Parameter&>(bias_)));
}

Tensor LinearLayer::forward_values(const Tensor& x) const {
  const Tensor w = effective_weight();
  Tensor y = Tensor::zeros(x.rows(), w.cols());
  kern::active().matmul(x.data(), w.data(), y.data(), x.rows(), x.cols(), w.cols());
  for (std::size_t i = 0; i < y.rows(); ++i)
    kern::active().add(y.data() + i * y.cols(), bias_.value.data(), y.data() + i * y.cols(),
                       y.cols());
  return y;
}

std::vector<Parameter*> LinearLayer::parameters() { return {&weight_, &bias_}; }

Mlp::Mlp(const std::string& name, const MlpSpec& spec, Rng& init, bool activate_output,
         InitKind output_init)
    : spec_(spec), activate_output_(activate_output) {
  spec_.validate();
  const InitKind hidden_init =
      spec_.activation == Activation::relu ? InitKind::he : InitKind::glorot;
  std::size_t in = spec_.input_dim;
  for (std::size_t l = 0; l < spec_.hidden_dims.size(); ++l) {
    layers_.emplace_back(name + ".l" + std::to_string(l), in, spec_.hidden_dims[l], init,
                         hidden_init);
    in = spec_.hidden_dims[l];
  }
  layers_.emplace_back(name + ".l" + std::to_string(spec_.hidden_dims.size()), in,
                       spec_.output_dim, init,
                       activate_output ? hidden_init : output_init);
}

Var Mlp::activate(Graph& g, Var x) const {
  return spec_.activation == Activation::relu ? g.relu(x) : g.tanh(x);
}

Tensor Mlp::activate_values(Tensor x) const {
  if (spec_.activation == Activation::relu) {
    kern::active().relu(x.data(), x.data(), x.size());
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::tanh(x[i]);
  }
  return x;
}

Var Mlp::forward(Graph& g, Var x) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    x = layers_[l].forward(g, x);
    if (l + 1 < layers_.size() || activate_output_) x = activate(g, x);
  }
  return x;
}

Tensor Mlp::forward_values(const Tensor& x) const {
  Tensor y = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    y = layers_[l].forward_values(y);
    if (l + 1 < layers_.size() || activate_output_) y = activate_values(std::move(y));
  }
  return y;
}

void Mlp::enable_spectral_norm(double coeff) {
  for (LinearLayer& l : layers_) l.enable_spectral_norm(coeff);
}

std::vector<double> Mlp::spectral_sigmas() const {
  std::vector<double> out;
  for (const LinearLayer& l : layers_)
    if (l.spectral_norm_enabled()) out.push_back(l.last_sigma());
  return out;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (LinearLayer& l : layers_)
    for (Parameter* p : l.parameters()) out.push_back(p);
  return out;
}

}  // namespace vgcrl::nd
