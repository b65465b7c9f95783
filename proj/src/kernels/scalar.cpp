#include <cmath>
#include <cstring>

#include "vgcrl/kernels/kernels.hpp"

namespace vgcrl::kern {
namespace {

// Broadcast form: for each row i the k-loop walks A's row once and streams
// B's rows into C's row. Every C[i][j] accumulates its k terms in the same
// order as the AVX2 variant, which is what makes the two bit-identical.
void matmul_scalar(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void transpose_scalar(const double* a, double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = a[i * cols + j];
}

void add_scalar(const double* a, const double* b, double* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

void scale_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void lerp_scalar(double tau, const double* x, double* y, std::size_t n) {
  if (tau == 1.0) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i];
    return;
  }
  // Delta form: exact at the fixed point y == x, so frozen training leaves
  // target networks bit-identical.
  for (std::size_t i = 0; i < n; ++i) y[i] += tau * (x[i] - y[i]);
}

void relu_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_scalar(const double* x, const double* g, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? g[i] : 0.0;
}

void adam_update_scalar(double* p, const double* g, double* m, double* v, std::size_t n,
                        double lr_t, double beta1, double beta2, double eps_t) {
  const double c1 = 1.0 - beta1;
  const double c2 = 1.0 - beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + c1 * g[i];
    v[i] = beta2 * v[i] + c2 * (g[i] * g[i]);
    p[i] = p[i] - lr_t * (m[i] / (std::sqrt(v[i]) + eps_t));
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {
      "scalar",
      matmul_scalar, transpose_scalar,
      add_scalar,    sub_scalar,  mul_scalar,
      scale_scalar,  axpy_scalar, lerp_scalar,
      relu_scalar,   relu_grad_scalar,
      adam_update_scalar,
  };
  return ops;
}

}  // namespace vgcrl::kern
