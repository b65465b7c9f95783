// AVX2 variants of the dense kernels. Compiled only into this translation
// unit with -mavx2; callers go through the dispatch table. FMA is not used:
// mul+add matches the scalar reference bit-for-bit, and each C[i][j] keeps
// the reference k-accumulation order (lanes stay independent across j).

#if defined(VGCRL_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "vgcrl/kernels/kernels.hpp"

namespace vgcrl::kern {
namespace {

void matmul_avx2(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d aip = _mm256_set1_pd(a[i * k + p]);
      const double* brow = b + p * n;
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        __m256d bv = _mm256_loadu_pd(brow + j);
        cv = _mm256_add_pd(cv, _mm256_mul_pd(aip, bv));
        _mm256_storeu_pd(crow + j, cv);
      }
      const double as = a[i * k + p];
      for (; j < n; ++j) crow[j] += as * brow[j];
    }
  }
}

void transpose_avx2(const double* a, double* out, std::size_t rows, std::size_t cols) {
  // Pure data movement; a blocked scalar loop is already memory-bound.
  constexpr std::size_t B = 32;
  for (std::size_t ib = 0; ib < rows; ib += B)
    for (std::size_t jb = 0; jb < cols; jb += B) {
      const std::size_t ie = ib + B < rows ? ib + B : rows;
      const std::size_t je = jb + B < cols ? jb + B : cols;
      for (std::size_t i = ib; i < ie; ++i)
        for (std::size_t j = jb; j < je; ++j) out[j * rows + i] = a[i * cols + j];
    }
}

template <typename VecOp, typename ScalOp>
inline void ew2(const double* a, const double* b, double* c, std::size_t n,
                VecOp vop, ScalOp sop) {
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(c + i, vop(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = sop(a[i], b[i]);
}

void add_avx2(const double* a, const double* b, double* c, std::size_t n) {
  ew2(a, b, c, n, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); },
      [](double x, double y) { return x + y; });
}

void sub_avx2(const double* a, const double* b, double* c, std::size_t n) {
  ew2(a, b, c, n, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); },
      [](double x, double y) { return x - y; });
}

void mul_avx2(const double* a, const double* b, double* c, std::size_t n) {
  ew2(a, b, c, n, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); },
      [](double x, double y) { return x * y; });
}

void scale_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = alpha * x[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void lerp_avx2(double tau, const double* x, double* y, std::size_t n) {
  if (tau == 1.0) {
    std::memcpy(y, x, n * sizeof(double));
    return;
  }
  const __m256d tv = _mm256_set1_pd(tau);
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(tv, d)));
  }
  for (; i < n; ++i) y[i] += tau * (x[i] - y[i]);
}

void relu_avx2(const double* x, double* y, std::size_t n) {
  // maxpd(x, 0) returns the second operand when x is NaN, matching the
  // scalar (x > 0 ? x : 0) exactly, NaN included.
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_avx2(const double* x, const double* g, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(y + i, _mm256_and_pd(mask, _mm256_loadu_pd(g + i)));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? g[i] : 0.0;
}

void adam_update_avx2(double* p, const double* g, double* m, double* v, std::size_t n,
                      double lr_t, double beta1, double beta2, double eps_t) {
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d c1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d c2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d lr = _mm256_set1_pd(lr_t);
  const __m256d ep = _mm256_set1_pd(eps_t);
  const std::size_t n4 = n & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    mv = _mm256_add_pd(_mm256_mul_pd(b1, mv), _mm256_mul_pd(c1, gv));
    vv = _mm256_add_pd(_mm256_mul_pd(b2, vv), _mm256_mul_pd(c2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vv), ep);
    const __m256d step = _mm256_mul_pd(lr, _mm256_div_pd(mv, denom));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  const double s1 = 1.0 - beta1, s2 = 1.0 - beta2;
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + s1 * g[i];
    v[i] = beta2 * v[i] + s2 * (g[i] * g[i]);
    p[i] = p[i] - lr_t * (m[i] / (std::sqrt(v[i]) + eps_t));
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {
      "avx2",
      matmul_avx2,  transpose_avx2,
      add_avx2,     sub_avx2,  mul_avx2,
      scale_avx2,   axpy_avx2, lerp_avx2,
      relu_avx2,    relu_grad_avx2,
      adam_update_avx2,
  };
  return ops;
}

}  // namespace vgcrl::kern

#endif  // VGCRL_HAVE_AVX2
