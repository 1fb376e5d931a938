#pragma once

// Dense double-precision kernels used by the differentiable-computation layer.
// A scalar reference implementation always exists; an AVX2+FMA variant is
// selected at runtime when the CPU supports it. The environment variable
// SNCBF_KERNELS=scalar|avx2 forces a choice (an unavailable choice falls back
// to scalar). All matrices are row-major.

namespace sncbf::kern {

struct Ops {
  // C (m x n) = A (m x k) * B (k x n); acc=true accumulates into C.
  void (*gemm_nn)(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
  // C (m x n) = A (m x k) * B^T, with B stored (n x k).
  void (*gemm_nt)(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
  // C (m x n) = A^T * B, with A stored (k x m), B stored (k x n).
  void (*gemm_tn)(const double* a, const double* b, double* c, int m, int k,
                  int n, bool acc);
  // y (m) = A (m x k) * x (k).
  void (*matvec)(const double* a, const double* x, double* y, int m, int k,
                 bool acc);
  void (*vadd)(const double* a, const double* b, double* out, int n);
  void (*vsub)(const double* a, const double* b, double* out, int n);
  void (*vmul)(const double* a, const double* b, double* out, int n);
  void (*axpy)(double alpha, const double* x, double* y, int n);
  double (*dot)(const double* a, const double* b, int n);
};

// Runtime-dispatched table. Resolved once, thread-safe.
const Ops& ops();
// Reference table, always scalar. Used by equivalence tests.
const Ops& scalar_ops();
// AVX2 table or nullptr when unsupported by CPU or build.
const Ops* avx2_ops();

const char* active_kernel_name();

}  // namespace sncbf::kern
