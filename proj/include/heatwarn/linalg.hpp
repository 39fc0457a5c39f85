// Small dense row-major kernels for the forecaster, templated on the scalar
// type. Shapes here are tiny (dims 5..96, row blocks up to a few thousand), so
// simple ikj loops with simd pragmas beat a general BLAS call. Every matrix
// argument takes a leading dimension (row stride) so per-head slices of a
// wider activation buffer can be addressed in place.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace heatwarn::la {

#if defined(__x86_64__) && defined(__GNUC__) && defined(__gnu_linux__)
#define HEATWARN_HAVE_SIMD_MATH 1
// Re-declare the libm entry points with the simd attribute so loops below can
// vectorize through glibc's libmvec variants (link with -lmvec).
extern "C" {
float hw_expf(float) __asm__("expf") __attribute__((__simd__("notinbranch")));
float hw_tanhf(float) __asm__("tanhf") __attribute__((__simd__("notinbranch")));
double hw_exp(double) __asm__("exp") __attribute__((__simd__("notinbranch")));
double hw_tanh(double) __asm__("tanh") __attribute__((__simd__("notinbranch")));
}
inline float sexp(float x) { return hw_expf(x); }
inline float stanh(float x) { return hw_tanhf(x); }
inline double sexp(double x) { return hw_exp(x); }
inline double stanh(double x) { return hw_tanh(x); }
#else
inline float sexp(float x) { return std::exp(x); }
inline float stanh(float x) { return std::tanh(x); }
inline double sexp(double x) { return std::exp(x); }
inline double stanh(double x) { return std::tanh(x); }
#endif

// C[m x n] = (or +=) A[m x k] * B[k x n]
template <bool Accum = false, typename Real>
void gemm_nn(const Real* A, const Real* B, Real* C, int m, int k, int n,
             int lda, int ldb, int ldc) {
  for (int i = 0; i < m; ++i) {
    Real* ci = C + static_cast<std::ptrdiff_t>(i) * ldc;
    if constexpr (!Accum)
      for (int j = 0; j < n; ++j) ci[j] = Real(0);
    const Real* ai = A + static_cast<std::ptrdiff_t>(i) * lda;
    for (int p = 0; p < k; ++p) {
      const Real a = ai[p];
      const Real* bp = B + static_cast<std::ptrdiff_t>(p) * ldb;
#pragma omp simd
      for (int j = 0; j < n; ++j) ci[j] += a * bp[j];
    }
  }
}

template <bool Accum = false, typename Real>
void gemm_nn(const Real* A, const Real* B, Real* C, int m, int k, int n) {
  gemm_nn<Accum>(A, B, C, m, k, n, k, n, n);
}

// C[m x n] = (or +=) A^T * B with A[k x m], B[k x n]; used for weight
// gradients, where k is the big row-block dimension.
template <bool Accum = false, typename Real>
void gemm_tn(const Real* A, const Real* B, Real* C, int m, int k, int n,
             int lda, int ldb, int ldc) {
  if constexpr (!Accum) {
    for (int i = 0; i < m; ++i) {
      Real* ci = C + static_cast<std::ptrdiff_t>(i) * ldc;
      for (int j = 0; j < n; ++j) ci[j] = Real(0);
    }
  }
  for (int r = 0; r < k; ++r) {
    const Real* ar = A + static_cast<std::ptrdiff_t>(r) * lda;
    const Real* br = B + static_cast<std::ptrdiff_t>(r) * ldb;
    for (int i = 0; i < m; ++i) {
      const Real a = ar[i];
      Real* ci = C + static_cast<std::ptrdiff_t>(i) * ldc;
#pragma omp simd
      for (int j = 0; j < n; ++j) ci[j] += a * br[j];
    }
  }
}

template <bool Accum = false, typename Real>
void gemm_tn(const Real* A, const Real* B, Real* C, int m, int k, int n) {
  gemm_tn<Accum>(A, B, C, m, k, n, m, n, n);
}

// C[m x n] = (or +=) A * B^T with A[m x k], B[n x k]; plain dot products.
template <bool Accum = false, typename Real>
void gemm_nt(const Real* A, const Real* B, Real* C, int m, int k, int n,
             int lda, int ldb, int ldc) {
  for (int i = 0; i < m; ++i) {
    const Real* ai = A + static_cast<std::ptrdiff_t>(i) * lda;
    Real* ci = C + static_cast<std::ptrdiff_t>(i) * ldc;
    for (int j = 0; j < n; ++j) {
      const Real* bj = B + static_cast<std::ptrdiff_t>(j) * ldb;
      Real s = 0;
#pragma omp simd reduction(+ : s)
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      if constexpr (Accum)
        ci[j] += s;
      else
        ci[j] = s;
    }
  }
}

template <bool Accum = false, typename Real>
void gemm_nt(const Real* A, const Real* B, Real* C, int m, int k, int n) {
  gemm_nt<Accum>(A, B, C, m, k, n, k, k, n);
}

template <typename Real>
void add_bias(Real* C, const Real* bias, int rows, int n, int ldc) {
  for (int i = 0; i < rows; ++i) {
    Real* ci = C + static_cast<std::ptrdiff_t>(i) * ldc;
#pragma omp simd
    for (int j = 0; j < n; ++j) ci[j] += bias[j];
  }
}

template <typename Real>
void column_sums_accum(const Real* C, Real* out, int rows, int n, int ldc) {
  for (int i = 0; i < rows; ++i) {
    const Real* ci = C + static_cast<std::ptrdiff_t>(i) * ldc;
#pragma omp simd
    for (int j = 0; j < n; ++j) out[j] += ci[j];
  }
}

template <typename Real>
void vadd(const Real* a, const Real* b, Real* out, std::ptrdiff_t n) {
#pragma omp simd
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename Real>
void vscale(Real* x, Real s, std::ptrdiff_t n) {
#pragma omp simd
  for (std::ptrdiff_t i = 0; i < n; ++i) x[i] *= s;
}

template <typename Real>
void vzero(Real* x, std::ptrdiff_t n) {
  std::fill(x, x + n, Real(0));
}

template <typename Real>
void vtanh(Real* x, std::ptrdiff_t n) {
#pragma omp simd
  for (std::ptrdiff_t i = 0; i < n; ++i) x[i] = stanh(x[i]);
}

// d *= (1 - y^2) where y = tanh(pre-activation), in place.
template <typename Real>
void tanh_backward(Real* d, const Real* y, std::ptrdiff_t n) {
#pragma omp simd
  for (std::ptrdiff_t i = 0; i < n; ++i) d[i] *= Real(1) - y[i] * y[i];
}

// Row-wise softmax in place over a contiguous [rows x cols] block.
template <typename Real>
void softmax_rows(Real* s, int rows, int cols) {
  for (int i = 0; i < rows; ++i) {
    Real* si = s + static_cast<std::ptrdiff_t>(i) * cols;
    Real mx = si[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, si[j]);
    Real sum = 0;
#pragma omp simd reduction(+ : sum)
    for (int j = 0; j < cols; ++j) {
      si[j] = sexp(si[j] - mx);
      sum += si[j];
    }
    Real inv = Real(1) / sum;
#pragma omp simd
    for (int j = 0; j < cols; ++j) si[j] *= inv;
  }
}

// Given P = softmax(S) row-wise and dL/dP, write dL/dS in place over dP.
template <typename Real>
void softmax_backward_rows(const Real* p, Real* dp, int rows, int cols) {
  for (int i = 0; i < rows; ++i) {
    const Real* pi = p + static_cast<std::ptrdiff_t>(i) * cols;
    Real* di = dp + static_cast<std::ptrdiff_t>(i) * cols;
    Real dot = 0;
#pragma omp simd reduction(+ : dot)
    for (int j = 0; j < cols; ++j) dot += pi[j] * di[j];
#pragma omp simd
    for (int j = 0; j < cols; ++j) di[j] = pi[j] * (di[j] - dot);
  }
}

// Row-wise layer normalization with learned gain/shift; saves mean and
// reciprocal std per row for the backward pass.
template <typename Real>
void layernorm_forward(const Real* x, const Real* gain, const Real* shift,
                       Real* y, Real* mean, Real* rstd, int rows, int d) {
  const Real eps = Real(1e-5);
  const Real inv_d = Real(1) / Real(d);
  for (int i = 0; i < rows; ++i) {
    const Real* xi = x + static_cast<std::ptrdiff_t>(i) * d;
    Real* yi = y + static_cast<std::ptrdiff_t>(i) * d;
    Real mu = 0;
#pragma omp simd reduction(+ : mu)
    for (int j = 0; j < d; ++j) mu += xi[j];
    mu *= inv_d;
    Real var = 0;
#pragma omp simd reduction(+ : var)
    for (int j = 0; j < d; ++j) var += (xi[j] - mu) * (xi[j] - mu);
    Real rs = Real(1) / std::sqrt(var * inv_d + eps);
    mean[i] = mu;
    rstd[i] = rs;
#pragma omp simd
    for (int j = 0; j < d; ++j) yi[j] = (xi[j] - mu) * rs * gain[j] + shift[j];
  }
}

template <typename Real>
void layernorm_backward(const Real* x, const Real* gain, const Real* mean,
                        const Real* rstd, const Real* dy, Real* dx, Real* dgain,
                        Real* dshift, int rows, int d) {
  const Real inv_d = Real(1) / Real(d);
  for (int i = 0; i < rows; ++i) {
    const Real* xi = x + static_cast<std::ptrdiff_t>(i) * d;
    const Real* dyi = dy + static_cast<std::ptrdiff_t>(i) * d;
    Real* dxi = dx + static_cast<std::ptrdiff_t>(i) * d;
    const Real mu = mean[i], rs = rstd[i];
    Real sum_dxhat = 0, sum_dxhat_xhat = 0;
#pragma omp simd reduction(+ : sum_dxhat, sum_dxhat_xhat)
    for (int j = 0; j < d; ++j) {
      Real xhat = (xi[j] - mu) * rs;
      Real dxhat = dyi[j] * gain[j];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat;
    }
#pragma omp simd
    for (int j = 0; j < d; ++j) {
      Real xhat = (xi[j] - mu) * rs;
      Real dxhat = dyi[j] * gain[j];
      dxi[j] = rs * (dxhat - inv_d * sum_dxhat - xhat * inv_d * sum_dxhat_xhat);
      dgain[j] += dyi[j] * xhat;
      dshift[j] += dyi[j];
    }
  }
}

}  // namespace heatwarn::la
