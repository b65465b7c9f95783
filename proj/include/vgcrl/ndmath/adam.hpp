#pragma once

#include <cstdint>
#include <vector>

#include "vgcrl/ndmath/graph.hpp"

namespace vgcrl::nd {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter Adam state: moment estimates shape-match the parameter.
struct AdamState {
  Tensor first_moment;
  Tensor second_moment;
  std::int64_t step_count = 0;
  AdamConfig hyper;

  AdamState() = default;
  AdamState(const Tensor& like, AdamConfig cfg)
      : first_moment(Tensor::zeros(like.rows(), like.cols())),
        second_moment(Tensor::zeros(like.rows(), like.cols())),
        hyper(cfg) {}
};

// One bias-corrected Adam update of `param` along `grad`. Throws on shape
// mismatch or non-finite gradient, naming the parameter.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const std::string& name);

// Drives adam_step over a fixed set of parameters using their accumulated
// grads. Parameter pointers must outlive the optimizer.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(std::vector<Parameter*> params, AdamConfig cfg);

  void step();
  void zero_grad();

  std::size_t num_params() const { return slots_.size(); }
  const AdamConfig& config() const { return cfg_; }

  // Checkpoint access: states in parameter order.
  std::vector<std::pair<Parameter*, AdamState*>> slots();

 private:
  struct Slot {
    Parameter* param;
    AdamState state;
  };
  std::vector<Slot> slots_;
  AdamConfig cfg_;
};

}  // namespace vgcrl::nd
