#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "vgcrl/common.hpp"
#include "vgcrl/kernels/kernels.hpp"
#include "vgcrl/rng.hpp"

using vgcrl::Rng;
namespace kern = vgcrl::kern;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool have_avx2() {
#if defined(VGCRL_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace

TEST_CASE("matmul matches the naive triple loop exactly") {
  Rng rng(7);
  const kern::Ops& ops = kern::scalar_ops();
  const std::vector<std::array<std::size_t, 3>> shapes = {
      {1, 1, 1}, {3, 4, 5}, {8, 8, 8}, {5, 17, 3}, {2, 1, 9}};
  for (auto [m, k, n] : shapes) {
    const std::vector<double> a = random_vec(m * k, rng);
    const std::vector<double> b = random_vec(k * n, rng);
    std::vector<double> c(m * n, -1.0);
    ops.matmul(a.data(), b.data(), c.data(), m, k, n);
    // Naive reference: same per-element k-order, so bitwise equality holds.
    std::vector<double> ref(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) ref[i * n + j] += a[i * k + p] * b[p * n + j];
    CHECK(bit_equal(c, ref));
  }
}

TEST_CASE("transpose round-trips") {
  Rng rng(9);
  const kern::Ops& ops = kern::scalar_ops();
  const std::size_t r = 7, c = 5;
  const std::vector<double> a = random_vec(r * c, rng);
  std::vector<double> at(r * c), back(r * c);
  ops.transpose(a.data(), at.data(), r, c);
  ops.transpose(at.data(), back.data(), c, r);
  CHECK(bit_equal(a, back));
  CHECK(at[0 * r + 3] == a[3 * c + 0]);
}

#if defined(VGCRL_HAVE_AVX2)
TEST_CASE("avx2 kernels are bit-identical to scalar") {
  if (!have_avx2()) {
    MESSAGE("CPU lacks AVX2; skipping equivalence checks");
    return;
  }
  Rng rng(11);
  const kern::Ops& s = kern::scalar_ops();
  const kern::Ops& v = kern::avx2_ops();

  // Sizes straddling the 4-lane boundary, including empty and tiny.
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                        std::size_t{5}, std::size_t{64}, std::size_t{257}}) {
    const std::vector<double> a = random_vec(n, rng);
    const std::vector<double> b = random_vec(n, rng);
    std::vector<double> c1(n), c2(n);

    s.add(a.data(), b.data(), c1.data(), n);
    v.add(a.data(), b.data(), c2.data(), n);
    CHECK(bit_equal(c1, c2));

    s.sub(a.data(), b.data(), c1.data(), n);
    v.sub(a.data(), b.data(), c2.data(), n);
    CHECK(bit_equal(c1, c2));

    s.mul(a.data(), b.data(), c1.data(), n);
    v.mul(a.data(), b.data(), c2.data(), n);
    CHECK(bit_equal(c1, c2));

    s.scale(1.7, a.data(), c1.data(), n);
    v.scale(1.7, a.data(), c2.data(), n);
    CHECK(bit_equal(c1, c2));

    c1 = b;
    c2 = b;
    s.axpy(-0.3, a.data(), c1.data(), n);
    v.axpy(-0.3, a.data(), c2.data(), n);
    CHECK(bit_equal(c1, c2));

    c1 = b;
    c2 = b;
    s.lerp(0.005, a.data(), c1.data(), n);
    v.lerp(0.005, a.data(), c2.data(), n);
    CHECK(bit_equal(c1, c2));

    s.relu(a.data(), c1.data(), n);
    v.relu(a.data(), c2.data(), n);
    CHECK(bit_equal(c1, c2));

    s.relu_grad(a.data(), b.data(), c1.data(), n);
    v.relu_grad(a.data(), b.data(), c2.data(), n);
    CHECK(bit_equal(c1, c2));
  }

  const std::vector<std::array<std::size_t, 3>> shapes = {
      {1, 1, 1}, {4, 4, 4}, {3, 7, 9}, {16, 33, 5}, {128, 54, 128}};
  for (auto [m, k, n] : shapes) {
    const std::vector<double> a = random_vec(m * k, rng);
    const std::vector<double> b = random_vec(k * n, rng);
    std::vector<double> c1(m * n), c2(m * n);
    s.matmul(a.data(), b.data(), c1.data(), m, k, n);
    v.matmul(a.data(), b.data(), c2.data(), m, k, n);
    CHECK(bit_equal(c1, c2));

    std::vector<double> t1(m * k), t2(m * k);
    s.transpose(a.data(), t1.data(), m, k);
    v.transpose(a.data(), t2.data(), m, k);
    CHECK(bit_equal(t1, t2));
  }

  // Adam update: moments and params must evolve identically.
  for (std::size_t n : {std::size_t{1}, std::size_t{6}, std::size_t{130}}) {
    std::vector<double> p1 = random_vec(n, rng);
    std::vector<double> p2 = p1;
    const std::vector<double> g = random_vec(n, rng);
    std::vector<double> m1(n, 0.0), v1(n, 0.0), m2(n, 0.0), v2(n, 0.0);
    for (int step = 0; step < 5; ++step) {
      s.adam_update(p1.data(), g.data(), m1.data(), v1.data(), n, 3e-4, 0.9, 0.999, 1e-8);
      v.adam_update(p2.data(), g.data(), m2.data(), v2.data(), n, 3e-4, 0.9, 0.999, 1e-8);
    }
    CHECK(bit_equal(p1, p2));
    CHECK(bit_equal(m1, m2));
    CHECK(bit_equal(v1, v2));
  }
}

TEST_CASE("relu NaN handling matches between variants") {
  if (!have_avx2()) return;
  const double nan = std::nan("");
  const double in[5] = {nan, -1.0, 0.0, -0.0, 2.0};
  const double g[5] = {1.0, 2.0, 3.0, 4.0, 5.0};
  double o1[5], o2[5], m1[5], m2[5];
  kern::scalar_ops().relu(in, o1, 5);
  kern::avx2_ops().relu(in, o2, 5);
  CHECK(std::memcmp(o1, o2, sizeof(o1)) == 0);
  kern::scalar_ops().relu_grad(in, g, m1, 5);
  kern::avx2_ops().relu_grad(in, g, m2, 5);
  CHECK(std::memcmp(m1, m2, sizeof(m1)) == 0);
}
#endif

TEST_CASE("runtime dispatch override") {
  kern::set_active("scalar");
  CHECK(std::string(kern::active().name) == "scalar");
#if defined(VGCRL_HAVE_AVX2)
  if (have_avx2()) {
    kern::set_active("avx2");
    CHECK(std::string(kern::active().name) == "avx2");
  }
#endif
  CHECK_THROWS_AS(kern::set_active("sse9"), vgcrl::Error);
  // restore default for other binaries sharing the process (none, but tidy)
#if defined(VGCRL_HAVE_AVX2)
  if (have_avx2()) kern::set_active("avx2");
#endif
}
