#include "sncbf/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

namespace sncbf::kern {
namespace {

void s_gemm_nn(const double* a, const double* b, double* c, int m, int k,
               int n, bool acc) {
  if (!acc) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      const double av = arow[l];
      const double* brow = b + static_cast<size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void s_gemm_nt(const double* a, const double* b, double* c, int m, int k,
               int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<size_t>(j) * k;
      double s = 0.0;
      for (int l = 0; l < k; ++l) s += arow[l] * brow[l];
      crow[j] = acc ? crow[j] + s : s;
    }
  }
}

void s_gemm_tn(const double* a, const double* b, double* c, int m, int k,
               int n, bool acc) {
  if (!acc) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int l = 0; l < k; ++l) {
    const double* arow = a + static_cast<size_t>(l) * m;
    const double* brow = b + static_cast<size_t>(l) * n;
    for (int i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = c + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void s_matvec(const double* a, const double* x, double* y, int m, int k,
              bool acc) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double s = 0.0;
    for (int l = 0; l < k; ++l) s += arow[l] * x[l];
    y[i] = acc ? y[i] + s : s;
  }
}

void s_vadd(const double* a, const double* b, double* out, int n) {
  for (int i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void s_vsub(const double* a, const double* b, double* out, int n) {
  for (int i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void s_vmul(const double* a, const double* b, double* out, int n) {
  for (int i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void s_axpy(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}
double s_dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

const Ops kScalarOps = {s_gemm_nn, s_gemm_nt, s_gemm_tn, s_matvec,
                        s_vadd,    s_vsub,    s_vmul,    s_axpy,  s_dot};

struct Selected {
  const Ops* table;
  const char* name;
};

Selected select() {
  const Ops* avx2 = avx2_ops();
  const char* env = std::getenv("SNCBF_KERNELS");
  if (env != nullptr) {
    const std::string want(env);
    if (want == "scalar") return {&kScalarOps, "scalar"};
    if (want == "avx2" && avx2 != nullptr) return {avx2, "avx2"};
  }
  if (avx2 != nullptr) return {avx2, "avx2"};
  return {&kScalarOps, "scalar"};
}

const Selected& selected() {
  static const Selected s = select();
  return s;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }
const Ops& ops() { return *selected().table; }
const char* active_kernel_name() { return selected().name; }

}  // namespace sncbf::kern
