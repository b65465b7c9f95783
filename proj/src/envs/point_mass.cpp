#include "vgcrl/envs/point_mass.hpp"

#include <algorithm>
#include <cmath>

namespace vgcrl::env {

std::vector<double> ramp_wind_profile(std::size_t n_dims) {
  std::vector<double> wind(n_dims);
  for (std::size_t i = 0; i < n_dims; ++i) wind[i] = 11.0 * static_cast<double>(i);
  return wind;
}

namespace {

double det_small(const nd::Tensor& m) {
  const std::size_t n = m.rows();
  // Gaussian elimination with partial pivoting; n here is the projection
  // size (tiny).
  nd::Tensor a = m;
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a.at(i, k)) > std::abs(a.at(piv, k))) piv = i;
    if (a.at(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(piv, j), a.at(k, j));
      det = -det;
    }
    det *= a.at(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a.at(i, k) / a.at(k, k);
      for (std::size_t j = k; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
    }
  }
  return det;
}

}  // namespace

nd::Tensor sample_projection(Rng& rng, std::size_t rows, std::size_t n) {
  VGCRL_CHECK(rows >= 2, "projection: need at least 2 rows, got ", rows);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    nd::Tensor w = nd::Tensor::zeros(rows, n);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal();
    if (rows == n && std::abs(det_small(w)) < 1e-6) continue;
    return w;
  }
  fail("projection: could not sample a non-singular matrix");
}

PointMassEnv::PointMassEnv(PointMassConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  VGCRL_CHECK(config_.n_dims >= 1, "point mass: n_dims must be >= 1, got ", config_.n_dims);
  VGCRL_CHECK(config_.horizon >= 1, "point mass: horizon must be >= 1");
  if (config_.wind.empty()) config_.wind.assign(config_.n_dims, 0.0);
  VGCRL_CHECK(config_.wind.size() == config_.n_dims, "point mass: wind profile has ",
              config_.wind.size(), " entries for ", config_.n_dims, " dims");
  for (double r : config_.wind)
    VGCRL_CHECK(r >= 0.0, "point mass: wind range must be non-negative, got ", r);
  if (config_.projected) {
    if (config_.projection_override) {
      projection_ = *config_.projection_override;
      VGCRL_CHECK(projection_.cols() == config_.n_dims,
                  "point mass: projection override has ", projection_.cols(),
                  " cols for ", config_.n_dims, " dims");
    } else {
      Rng prng(derive_seed(config_.projection_seed, 0x9707));
      projection_ = sample_projection(prng, config_.projection_rows, config_.n_dims);
    }
  }
  positions_.assign(config_.n_dims, 0.0);
  velocities_.assign(config_.n_dims, 0.0);
}

const nd::Tensor& PointMassEnv::projection() const {
  VGCRL_CHECK(config_.projected, "point mass: not a projected environment");
  return projection_;
}

EnvSpec PointMassEnv::spec() const {
  EnvSpec s;
  s.action_dim = config_.n_dims;
  s.horizon = config_.horizon;
  if (!config_.projected) {
    s.obs_dim = 2 * config_.n_dims;
  } else {
    const std::size_t m = projection_.rows();
    s.obs_dim = config_.project_velocities ? 2 * m : m + config_.n_dims;
  }
  return s;
}

std::vector<double> PointMassEnv::observe() const {
  std::vector<double> obs;
  if (!config_.projected) {
    obs.reserve(2 * config_.n_dims);
    obs.insert(obs.end(), positions_.begin(), positions_.end());
    obs.insert(obs.end(), velocities_.begin(), velocities_.end());
    return obs;
  }
  const std::size_t m = projection_.rows();
  obs.assign(config_.project_velocities ? 2 * m : m + config_.n_dims, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < config_.n_dims; ++j) s += projection_.at(i, j) * positions_[j];
    obs[i] = s;
  }
  if (config_.project_velocities) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < config_.n_dims; ++j)
        s += projection_.at(i, j) * velocities_[j];
      obs[m + i] = s;
    }
  } else {
    for (std::size_t j = 0; j < config_.n_dims; ++j) obs[m + j] = velocities_[j];
  }
  return obs;
}

std::vector<double> PointMassEnv::reset() {
  for (std::size_t i = 0; i < config_.n_dims; ++i) {
    positions_[i] = rng_.uniform(-config_.arena_half, config_.arena_half);
    velocities_[i] = 0.0;
  }
  t_ = 0;
  return observe();
}

PointMassEnv::StepResult PointMassEnv::step(std::span<const double> action) {
  VGCRL_CHECK(action.size() == config_.n_dims, "point mass: action has ", action.size(),
              " dims, expected ", config_.n_dims);
  for (std::size_t i = 0; i < config_.n_dims; ++i) {
    VGCRL_CHECK(std::isfinite(action[i]), "point mass: non-finite action in dim ", i);
    const double a = std::clamp(action[i], -1.0, 1.0);
    // Wind is drawn every step in every dimension so the RNG stream does not
    // depend on the profile.
    const double wind = rng_.uniform(-config_.wind[i], config_.wind[i]);
    velocities_[i] += config_.dt * (config_.action_scale * a + wind);
    positions_[i] += config_.dt * velocities_[i];
    if (positions_[i] > config_.arena_half) {
      positions_[i] = config_.arena_half;
      velocities_[i] = 0.0;
    } else if (positions_[i] < -config_.arena_half) {
      positions_[i] = -config_.arena_half;
      velocities_[i] = 0.0;
    }
  }
  t_ += 1;
  return {observe(), t_ >= config_.horizon};
}

}  // namespace vgcrl::env
