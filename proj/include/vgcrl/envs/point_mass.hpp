#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vgcrl/ndmath/tensor.hpp"
#include "vgcrl/rng.hpp"

namespace vgcrl::env {

struct EnvSpec {
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;
  std::size_t horizon = 0;
};

// N independent point masses on a line, one per dimension, inside the arena
// [-arena_half, arena_half]. Dimension i feels a per-step force drawn from
// U(-wind[i], wind[i]). Integration is explicit Euler with unit mass:
//   v += dt * (action_scale * a + wind);  x += dt * v
// Hitting a wall clamps the position and zeroes that dimension's velocity.
//
// Observations are [positions, velocities] (2N), or with `projected` set,
// [P * positions, velocities] where P is a fixed seeded random matrix
// (optionally applied to velocities too).
struct PointMassConfig {
  std::size_t n_dims = 2;
  std::vector<double> wind;  // per-dim force range; empty means all zero
  std::size_t horizon = 100;
  double dt = 0.05;
  double action_scale = 10.0;
  double arena_half = 1.5;

  bool projected = false;
  std::size_t projection_rows = 2;
  std::uint64_t projection_seed = 0;
  bool project_velocities = false;
  std::optional<nd::Tensor> projection_override;  // test hook; bypasses sampling
};

// The wind profile used throughout: R_i = 11 * i.
std::vector<double> ramp_wind_profile(std::size_t n_dims);

// Samples a [rows, n] projection with N(0,1) entries; square matrices with
// |det| < 1e-6 are resampled.
nd::Tensor sample_projection(Rng& rng, std::size_t rows, std::size_t n);

class PointMassEnv {
 public:
  PointMassEnv(PointMassConfig config, std::uint64_t seed);

  std::vector<double> reset();

  struct StepResult {
    std::vector<double> obs;
    bool done = false;
  };
  StepResult step(std::span<const double> action);

  EnvSpec spec() const;
  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

  std::span<const double> positions() const { return positions_; }
  std::span<const double> velocities() const { return velocities_; }
  std::size_t t() const { return t_; }
  const nd::Tensor& projection() const;
  const PointMassConfig& config() const { return config_; }

  std::vector<double> observe() const;

 private:
  PointMassConfig config_;
  Rng rng_;
  nd::Tensor projection_;
  std::vector<double> positions_;
  std::vector<double> velocities_;
  std::size_t t_ = 0;
};

}  // namespace vgcrl::env
