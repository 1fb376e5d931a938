#include "sncbf/kernels.hpp"

#if defined(SNCBF_ENABLE_AVX2) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cstring>

namespace sncbf::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Adds sum_t a_t * brow_t into crow, vectorized over columns.
template <int T>
inline void fma_rows(const double* av, const double* const* brow, double* crow,
                     int n) {
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d c = _mm256_loadu_pd(crow + j);
    for (int t = 0; t < T; ++t)
      c = _mm256_fmadd_pd(_mm256_set1_pd(av[t]), _mm256_loadu_pd(brow[t] + j),
                          c);
    _mm256_storeu_pd(crow + j, c);
  }
  for (; j < n; ++j) {
    double s = crow[j];
    for (int t = 0; t < T; ++t) s += av[t] * brow[t][j];
    crow[j] = s;
  }
}

void a_gemm_nn(const double* a, const double* b, double* c, int m, int k,
               int n, bool acc) {
  if (!acc) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    int l = 0;
    for (; l + 4 <= k; l += 4) {
      const double av[4] = {arow[l], arow[l + 1], arow[l + 2], arow[l + 3]};
      const double* brow[4] = {
          b + static_cast<size_t>(l) * n, b + static_cast<size_t>(l + 1) * n,
          b + static_cast<size_t>(l + 2) * n,
          b + static_cast<size_t>(l + 3) * n};
      fma_rows<4>(av, brow, crow, n);
    }
    for (; l < k; ++l) {
      const double av[1] = {arow[l]};
      const double* brow[1] = {b + static_cast<size_t>(l) * n};
      fma_rows<1>(av, brow, crow, n);
    }
  }
}

void a_gemm_nt(const double* a, const double* b, double* c, int m, int k,
               int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<size_t>(j) * k;
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      int l = 0;
      for (; l + 8 <= k; l += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + l),
                             _mm256_loadu_pd(brow + l), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + l + 4),
                             _mm256_loadu_pd(brow + l + 4), s1);
      }
      for (; l + 4 <= k; l += 4)
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + l),
                             _mm256_loadu_pd(brow + l), s0);
      double s = hsum(_mm256_add_pd(s0, s1));
      for (; l < k; ++l) s += arow[l] * brow[l];
      crow[j] = acc ? crow[j] + s : s;
    }
  }
}

void a_gemm_tn(const double* a, const double* b, double* c, int m, int k,
               int n, bool acc) {
  if (!acc) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  // l-blocking keeps each C row pass amortized over 4 rank-1 updates.
  for (int l0 = 0; l0 < k; l0 += 4) {
    const int lb = (k - l0 < 4) ? (k - l0) : 4;
    for (int i = 0; i < m; ++i) {
      double* crow = c + static_cast<size_t>(i) * n;
      double av[4];
      const double* brow[4];
      for (int t = 0; t < lb; ++t) {
        av[t] = a[static_cast<size_t>(l0 + t) * m + i];
        brow[t] = b + static_cast<size_t>(l0 + t) * n;
      }
      switch (lb) {
        case 4: fma_rows<4>(av, brow, crow, n); break;
        case 3: fma_rows<3>(av, brow, crow, n); break;
        case 2: fma_rows<2>(av, brow, crow, n); break;
        default: fma_rows<1>(av, brow, crow, n); break;
      }
    }
  }
}

void a_matvec(const double* a, const double* x, double* y, int m, int k,
              bool acc) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    int l = 0;
    for (; l + 8 <= k; l += 8) {
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + l), _mm256_loadu_pd(x + l),
                           s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + l + 4),
                           _mm256_loadu_pd(x + l + 4), s1);
    }
    for (; l + 4 <= k; l += 4)
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + l), _mm256_loadu_pd(x + l),
                           s0);
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; l < k; ++l) s += arow[l] * x[l];
    y[i] = acc ? y[i] + s : s;
  }
}

void a_vadd(const double* a, const double* b, double* out, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_loadu_pd(a + i),
                                   _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void a_vsub(const double* a, const double* b, double* out, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                   _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void a_vmul(const double* a, const double* b, double* out, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                   _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void a_axpy(double alpha, const double* x, double* y, int n) {
  const __m256d av = _mm256_set1_pd(alpha);
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                               _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double a_dot(const double* a, const double* b, int n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                         _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

const Ops kAvx2Ops = {a_gemm_nn, a_gemm_nt, a_gemm_tn, a_matvec, a_vadd,
                      a_vsub,    a_vmul,    a_axpy,    a_dot};

}  // namespace

const Ops* avx2_ops() {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return &kAvx2Ops;
  return nullptr;
}

}  // namespace sncbf::kern

#else

namespace sncbf::kern {
const Ops* avx2_ops() { return nullptr; }
}  // namespace sncbf::kern

#endif
