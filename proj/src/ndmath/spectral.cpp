#include "vgcrl/ndmath/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "vgcrl/kernels/kernels.hpp"
#include "vgcrl/rng.hpp"

namespace vgcrl::nd {
namespace {

const kern::Ops& K() { return kern::active(); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor c = Tensor::zeros(a.rows(), b.cols());
  K().matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Tensor transposed(const Tensor& a) {
  Tensor t = Tensor::zeros(a.cols(), a.rows());
  K().transpose(a.data(), t.data(), a.rows(), a.cols());
  return t;
}

// Modified Gram-Schmidt on the columns of v, in place. Columns that vanish
// numerically are left as zero (the caller treats a fully degenerate basis
// as the zero-matrix case).
void orthonormalize_columns(Tensor& v) {
  const std::size_t n = v.rows(), b = v.cols();
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += v.at(i, p) * v.at(i, j);
      for (std::size_t i = 0; i < n; ++i) v.at(i, j) -= dot * v.at(i, p);
    }
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm2 += v.at(i, j) * v.at(i, j);
    const double norm = std::sqrt(norm2);
    if (norm > 1e-150) {
      for (std::size_t i = 0; i < n; ++i) v.at(i, j) /= norm;
    } else {
      for (std::size_t i = 0; i < n; ++i) v.at(i, j) = 0.0;
    }
  }
}

// Cyclic Jacobi eigensolver for a small symmetric matrix. Returns the top
// eigenpair (eigenvalue, eigenvector). Only ever called with block-sized
// inputs so the O(b^3) sweeps are negligible.
void jacobi_top_eig(Tensor a, double& eig_out, std::vector<double>& vec_out) {
  const std::size_t n = a.rows();
  Tensor v = Tensor::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a.at(i, p), aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a.at(p, i), aqi = a.at(q, i);
          a.at(p, i) = c * api - s * aqi;
          a.at(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v.at(i, p), viq = v.at(i, q);
          v.at(i, p) = c * vip - s * viq;
          v.at(i, q) = s * vip + c * viq;
        }
      }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (a.at(i, i) > a.at(best, best)) best = i;
  eig_out = a.at(best, best);
  vec_out.resize(n);
  for (std::size_t i = 0; i < n; ++i) vec_out[i] = v.at(i, best);
}

void seed_basis(const Tensor& w, SpectralState& state, std::uint64_t seed, int block) {
  const std::size_t n = w.cols();
  const std::size_t b = std::max<std::size_t>(
      1, std::min({static_cast<std::size_t>(block), n, w.rows()}));
  Rng rng(derive_seed(seed, 0x5eC7));
  state.basis = Tensor::zeros(n, b);
  for (std::size_t i = 0; i < n * b; ++i) state.basis[i] = rng.normal();
  orthonormalize_columns(state.basis);
  state.initialized = true;
}

SpectralEstimate rayleigh_ritz(const Tensor& w, const Tensor& basis) {
  // Projected Gram matrix G = (W V)^T (W V); its top eigenpair gives the
  // Ritz estimate of sigma_max^2 and the right singular vector.
  const Tensor wv = matmul(w, basis);
  const Tensor g = matmul(transposed(wv), wv);
  double eig = 0.0;
  std::vector<double> y;
  jacobi_top_eig(g, eig, y);
  SpectralEstimate est;
  est.sigma_max = eig > 0.0 ? std::sqrt(eig) : 0.0;
  const std::size_t m = w.rows(), n = w.cols(), b = basis.cols();
  est.v = Tensor::zeros(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < b; ++j) s += basis.at(i, j) * y[j];
    est.v[i] = s;
  }
  est.u = Tensor::zeros(m, 1);
  if (est.sigma_max > 0.0) {
    const Tensor wvv = matmul(w, est.v);
    for (std::size_t i = 0; i < m; ++i) est.u[i] = wvv[i] / est.sigma_max;
  }
  return est;
}

bool is_zero(const Tensor& t) {
  for (double x : t.values())
    if (x != 0.0) return false;
  return true;
}

}  // namespace

SpectralEstimate spectral_norm_step(const Tensor& w, SpectralState& state, int sweeps,
                                    std::uint64_t seed, int block) {
  VGCRL_CHECK(w.rank() == 2, "spectral_norm: expected a matrix, got ", w.shape_str());
  VGCRL_CHECK(sweeps >= 1, "spectral_norm: sweeps must be >= 1, got ", sweeps);
  if (!state.initialized) seed_basis(w, state, seed, block);
  VGCRL_CHECK(state.basis.rows() == w.cols(), "spectral_norm: stale state for shape ",
              w.shape_str());
  for (int it = 0; it < sweeps; ++it) {
    Tensor next = matmul(transposed(w), matmul(w, state.basis));
    if (is_zero(next)) {
      // Zero matrix (or fully annihilated basis): keep the old basis so the
      // estimate degrades gracefully to sigma = 0.
      break;
    }
    orthonormalize_columns(next);
    state.basis = std::move(next);
  }
  return rayleigh_ritz(w, state.basis);
}

SpectralEstimate spectral_norm(const Tensor& w, int n_iters, std::uint64_t seed, int block) {
  SpectralState state;
  return spectral_norm_step(w, state, n_iters, seed, block);
}

Tensor apply_spectral_constraint(const Tensor& w, double coeff) {
  VGCRL_CHECK(coeff > 0.0, "apply_spectral_constraint: coefficient must be > 0, got ", coeff);
  SpectralState state;
  double sigma = 0.0;
  double prev = -1.0;
  // Iterate sweeps until the Ritz value stops moving; the tail is cheap
  // because each call advances the same warm basis.
  for (int round = 0; round < 4000; ++round) {
    sigma = spectral_norm_step(w, state, 1).sigma_max;
    if (round >= 8 && std::abs(sigma - prev) <= 1e-14 * std::max(sigma, 1e-300)) break;
    prev = sigma;
  }
  if (sigma < 1e-12) return w;
  Tensor out = Tensor::zeros(w.rows(), w.cols());
  kern::active().scale(coeff / sigma, w.data(), out.data(), w.size());
  return out;
}

Tensor apply_spectral_constraint_warm(const Tensor& w, double coeff, SpectralState& state,
                                      int sweeps, double* sigma_out) {
  const double sigma = spectral_norm_step(w, state, sweeps).sigma_max;
  if (sigma_out) *sigma_out = sigma;
  if (sigma < 1e-12) return w;
  Tensor out = Tensor::zeros(w.rows(), w.cols());
  kern::active().scale(coeff / sigma, w.data(), out.data(), w.size());
  return out;
}

}  // namespace vgcrl::nd
