#pragma once

#include <cstddef>
#include <string>

namespace vgcrl::kern {

// Dense double-precision inner loops behind everything ndmath does. Each entry
// has a scalar reference implementation and, on x86-64 with AVX2, a vector
// variant selected once at startup. The two variants are bit-identical: the
// AVX2 kernels keep the reference accumulation order per output element and
// use mul+add (no FMA), so equivalence tests assert exact equality, and a run
// produces the same bytes no matter which variant was picked.
//
// Transcendentals (tanh/exp/log) are deliberately not here: libm is scalar
// and its results are not reproducible across vector math libraries.
struct Ops {
  const char* name;

  // c[m x n] = a[m x k] * b[k x n], row-major, c overwritten.
  void (*matmul)(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n);
  // out[cols x rows] = transpose of a[rows x cols].
  void (*transpose)(const double* a, double* out, std::size_t rows, std::size_t cols);

  void (*add)(const double* a, const double* b, double* c, std::size_t n);
  void (*sub)(const double* a, const double* b, double* c, std::size_t n);
  void (*mul)(const double* a, const double* b, double* c, std::size_t n);
  void (*scale)(double alpha, const double* x, double* y, std::size_t n);   // y = alpha*x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);    // y += alpha*x
  void (*lerp)(double tau, const double* x, double* y, std::size_t n);      // y += tau*(x-y); tau=1 copies

  void (*relu)(const double* x, double* y, std::size_t n);                  // y = max(x, 0)
  void (*relu_grad)(const double* x, const double* g, double* y, std::size_t n);  // y = x>0 ? g : 0

  // One Adam update with folded bias correction:
  //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2;  p -= lr_t * m / (sqrt(v) + eps_t)
  void (*adam_update)(double* p, const double* g, double* m, double* v, std::size_t n,
                      double lr_t, double beta1, double beta2, double eps_t);
};

const Ops& scalar_ops();

#if defined(VGCRL_HAVE_AVX2)
const Ops& avx2_ops();
#endif

// Runtime-selected kernel set: AVX2 when compiled in and the CPU supports it,
// scalar otherwise. VGCRL_KERNEL=scalar|avx2 overrides.
const Ops& active();

// For equivalence tests. Throws on an unknown or unavailable name.
void set_active(const std::string& name);

}  // namespace vgcrl::kern
