#include "vgcrl/ndmath/adam.hpp"

#include <cmath>

#include "vgcrl/kernels/kernels.hpp"

namespace vgcrl::nd {

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const std::string& name) {
  VGCRL_CHECK(param.same_shape(grad), "adam_step(", name, "): grad shape ",
              grad.shape_str(), " vs param ", param.shape_str());
  VGCRL_CHECK(param.same_shape(state.first_moment), "adam_step(", name,
              "): state shape ", state.first_moment.shape_str(), " vs param ",
              param.shape_str());
  VGCRL_CHECK(grad.all_finite(), "adam_step(", name, "): non-finite gradient");

  state.step_count += 1;
  const AdamConfig& h = state.hyper;
  const double t = static_cast<double>(state.step_count);
  const double bc2 = std::sqrt(1.0 - std::pow(h.beta2, t));
  // Folded bias correction: p -= lr_t * m / (sqrt(v) + eps_t) is algebraically
  // identical to the m-hat / v-hat form.
  const double lr_t = h.learning_rate * bc2 / (1.0 - std::pow(h.beta1, t));
  const double eps_t = h.epsilon * bc2;
  kern::active().adam_update(param.data(), grad.data(), state.first_moment.data(),
                             state.second_moment.data(), param.size(), lr_t, h.beta1,
                             h.beta2, eps_t);
}

AdamOptimizer::AdamOptimizer(std::vector<Parameter*> params, AdamConfig cfg) : cfg_(cfg) {
  slots_.reserve(params.size());
  for (Parameter* p : params) slots_.push_back({p, AdamState(p->value, cfg)});
}

void AdamOptimizer::step() {
  for (Slot& s : slots_) adam_step(s.param->value, s.param->grad, s.state, s.param->name);
}

void AdamOptimizer::zero_grad() {
  for (Slot& s : slots_) s.param->zero_grad();
}

std::vector<std::pair<Parameter*, AdamState*>> AdamOptimizer::slots() {
  std::vector<std::pair<Parameter*, AdamState*>> out;
  out.reserve(slots_.size());
  for (Slot& s : slots_) out.emplace_back(s.param, &s.state);
  return out;
}

}  // namespace vgcrl::nd
