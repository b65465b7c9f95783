#pragma once

#include <cstdint>

#include "vgcrl/ndmath/tensor.hpp"

namespace vgcrl::nd {

// Persistent subspace for warm-started spectral-norm estimates. One "sweep"
// applies W^T W to the whole block and re-orthonormalizes; the estimate is
// the top Rayleigh-Ritz value over the block. A block of a few vectors is
// what lets the estimate converge even when the top singular values cluster
// (random square matrices); with block size 1 this reduces to classic
// single-vector power iteration.
struct SpectralState {
  Tensor basis;  // [cols(W), block], orthonormal columns
  bool initialized = false;
};

struct SpectralEstimate {
  double sigma_max = 0.0;
  Tensor u;  // [rows, 1] left singular-vector estimate
  Tensor v;  // [cols, 1] right singular-vector estimate
};

inline constexpr int kSpectralBlockDefault = 8;

// Runs `sweeps` power sweeps on the warm-started state (seeding it on first
// use) and returns the current estimate. Zero matrices yield sigma_max = 0.
SpectralEstimate spectral_norm_step(const Tensor& w, SpectralState& state, int sweeps,
                                    std::uint64_t seed = 0,
                                    int block = kSpectralBlockDefault);

// Fresh-state estimate after exactly n_iters sweeps.
SpectralEstimate spectral_norm(const Tensor& w, int n_iters, std::uint64_t seed,
                               int block = kSpectralBlockDefault);

// Returns coeff * w / sigma_max(w), iterating internally until the estimate
// has converged; passes w through unchanged when sigma_max < 1e-12.
Tensor apply_spectral_constraint(const Tensor& w, double coeff);

// As above but reusing (and advancing) a warm-started state with a fixed
// sweep budget; the training-path variant.
Tensor apply_spectral_constraint_warm(const Tensor& w, double coeff, SpectralState& state,
                                      int sweeps, double* sigma_out = nullptr);

}  // namespace vgcrl::nd
