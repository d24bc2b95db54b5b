#pragma once

// Allocation-free Cholesky kernels for the per-node Hermitian blocks
// (n is tiny: the transverse dimension or transverse+1).

#include <cmath>
#include <complex>

namespace sasaki::detail {

using Complex = std::complex<double>;

// Lower Cholesky factor of a Hermitian matrix in row-major storage.
// Returns false when a pivot fails strict positivity.
inline bool cholesky(int n, const Complex* a, Complex* l) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      Complex s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= l[i * n + k] * std::conj(l[j * n + k]);
      if (i == j) {
        const double d = s.real();
        if (!(d > 0.0)) return false;
        l[i * n + i] = Complex(std::sqrt(d), 0.0);
      } else {
        l[i * n + j] = s / l[j * n + j].real();
      }
    }
  }
  return true;
}

inline double cholesky_det(int n, const Complex* l) {
  double d = 1.0;
  for (int i = 0; i < n; ++i) {
    const double p = l[i * n + i].real();
    d *= p * p;
  }
  return d;
}

// Solves L L^H x = b.
inline void cholesky_solve(int n, const Complex* l, const Complex* b, Complex* x) {
  for (int i = 0; i < n; ++i) {
    Complex s = b[i];
    for (int k = 0; k < i; ++k) s -= l[i * n + k] * x[k];
    x[i] = s / l[i * n + i].real();
  }
  for (int i = n - 1; i >= 0; --i) {
    Complex s = x[i];
    for (int k = i + 1; k < n; ++k) s -= std::conj(l[k * n + i]) * x[k];
    x[i] = s / l[i * n + i].real();
  }
}

// x^H (L L^H)^{-1} x for a Hermitian PD factorization; real and >= 0.
inline double cholesky_quadform(int n, const Complex* l, const Complex* x, Complex* work) {
  cholesky_solve(n, l, x, work);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += (std::conj(x[i]) * work[i]).real();
  return acc;
}

// Inverse via Cholesky into row-major `inv`; `work` holds n entries.
inline void cholesky_inverse(int n, const Complex* l, Complex* inv, Complex* rhs,
                             Complex* work) {
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) rhs[i] = (i == col) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
    cholesky_solve(n, l, rhs, work);
    for (int i = 0; i < n; ++i) inv[i * n + col] = work[i];
  }
}

// Determinant of a small Hermitian matrix without positivity assumptions
// (LU with partial pivoting on a stack copy; n <= 8).
inline double hermitian_det(int n, const Complex* a) {
  Complex m[64];
  for (int e = 0; e < n * n; ++e) m[e] = a[e];
  double sign = 1.0;
  Complex det(1.0, 0.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(m[col * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(m[r * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(m[piv * n + c], m[col * n + c]);
      sign = -sign;
    }
    det *= m[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const Complex f = m[r * n + col] / m[col * n + col];
      for (int c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
    }
  }
  return sign * det.real();
}

}  // namespace sasaki::detail
