#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sncbf/kernels.hpp"
#include "sncbf/rng.hpp"

using namespace sncbf;

namespace {

std::vector<double> random_vec(size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

double max_abs_diff(const std::vector<double>& a,
                    const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar gemm matches a naive triple loop") {
  Rng rng(11);
  const int m = 7, k = 13, n = 9;
  auto a = random_vec(m * k, rng);
  auto b = random_vec(k * n, rng);
  std::vector<double> c(m * n, 0.0), ref(m * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < k; ++l) s += a[i * k + l] * b[l * n + j];
      ref[i * n + j] = s;
    }
  kern::scalar_ops().gemm_nn(a.data(), b.data(), c.data(), m, k, n, false);
  CHECK(max_abs_diff(c, ref) == doctest::Approx(0.0).epsilon(1e-14));

  // Transposed variants against the same reference.
  std::vector<double> at(k * m), bt(n * k);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < k; ++l) at[l * m + i] = a[i * k + l];
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < n; ++j) bt[j * k + l] = b[l * n + j];
  std::vector<double> c2(m * n, 0.0);
  kern::scalar_ops().gemm_nt(a.data(), bt.data(), c2.data(), m, k, n, false);
  CHECK(max_abs_diff(c2, ref) < 1e-12);
  std::vector<double> c3(m * n, 0.0);
  kern::scalar_ops().gemm_tn(at.data(), b.data(), c3.data(), m, k, n, false);
  CHECK(max_abs_diff(c3, ref) < 1e-12);
}

TEST_CASE("accumulate flag adds instead of overwriting") {
  Rng rng(5);
  const int m = 4, k = 6, n = 5;
  auto a = random_vec(m * k, rng);
  auto b = random_vec(k * n, rng);
  std::vector<double> once(m * n, 0.0);
  kern::scalar_ops().gemm_nn(a.data(), b.data(), once.data(), m, k, n, false);
  std::vector<double> twice = once;
  kern::scalar_ops().gemm_nn(a.data(), b.data(), twice.data(), m, k, n, true);
  for (size_t i = 0; i < once.size(); ++i)
    CHECK(twice[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-13));
}

TEST_CASE("dispatched kernels agree with scalar reference") {
  const kern::Ops* avx2 = kern::avx2_ops();
  if (avx2 == nullptr) {
    MESSAGE("avx2 unavailable; dispatch equivalence skipped");
    return;
  }
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 1 + rng.uniform_int(40);
    const int k = 1 + rng.uniform_int(70);
    const int n = 1 + rng.uniform_int(40);
    auto a = random_vec(static_cast<size_t>(m) * k, rng);
    auto b = random_vec(static_cast<size_t>(k) * n, rng);
    auto bt = random_vec(static_cast<size_t>(n) * k, rng);
    auto at = random_vec(static_cast<size_t>(k) * m, rng);
    auto x = random_vec(static_cast<size_t>(k), rng);

    std::vector<double> cs(static_cast<size_t>(m) * n, 1.0);
    std::vector<double> cv = cs;
    kern::scalar_ops().gemm_nn(a.data(), b.data(), cs.data(), m, k, n, true);
    avx2->gemm_nn(a.data(), b.data(), cv.data(), m, k, n, true);
    CHECK(max_abs_diff(cs, cv) < 1e-11);

    kern::scalar_ops().gemm_nt(a.data(), bt.data(), cs.data(), m, k, n, false);
    avx2->gemm_nt(a.data(), bt.data(), cv.data(), m, k, n, false);
    CHECK(max_abs_diff(cs, cv) < 1e-11);

    kern::scalar_ops().gemm_tn(at.data(), b.data(), cs.data(), m, k, n, true);
    avx2->gemm_tn(at.data(), b.data(), cv.data(), m, k, n, true);
    CHECK(max_abs_diff(cs, cv) < 1e-11);

    std::vector<double> ys(static_cast<size_t>(m), 0.5), yv = ys;
    kern::scalar_ops().matvec(a.data(), x.data(), ys.data(), m, k, true);
    avx2->matvec(a.data(), x.data(), yv.data(), m, k, true);
    CHECK(max_abs_diff(ys, yv) < 1e-11);

    auto u = random_vec(static_cast<size_t>(k), rng);
    std::vector<double> os(static_cast<size_t>(k)), ov(os);
    kern::scalar_ops().vmul(x.data(), u.data(), os.data(), k);
    avx2->vmul(x.data(), u.data(), ov.data(), k);
    CHECK(max_abs_diff(os, ov) == 0.0);

    CHECK(std::abs(kern::scalar_ops().dot(x.data(), u.data(), k) -
                   avx2->dot(x.data(), u.data(), k)) < 1e-11);
  }
}

TEST_CASE("kernel selection reports a valid backend") {
  const std::string name = kern::active_kernel_name();
  CHECK((name == "scalar" || name == "avx2"));
}
