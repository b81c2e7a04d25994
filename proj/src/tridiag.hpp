#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace knodal {

// Symmetric tridiagonal matrix indexed like the mesh nodes. Subproblems with
// homogeneous conditions at window ends act on a contiguous node window
// [lo, hi] (inclusive); couplings across the window boundary are dropped,
// which is exactly the Dirichlet truncation.
struct Tridiag {
  std::vector<double> diag;  // size n
  std::vector<double> off;   // size n-1, off[i] couples i and i+1

  std::size_t n() const { return diag.size(); }
};

// y[lo..hi] = (A x)[lo..hi] using only entries inside the window.
inline void tridiag_matvec_window(const Tridiag& A, const std::vector<double>& x,
                                  std::size_t lo, std::size_t hi, std::vector<double>& y) {
  for (std::size_t i = lo; i <= hi; ++i) {
    double s = A.diag[i] * x[i];
    if (i > lo) s += A.off[i - 1] * x[i - 1];
    if (i < hi) s += A.off[i] * x[i + 1];
    y[i] = s;
  }
}

// xᵀ A x over the window.
inline double tridiag_quadratic_window(const Tridiag& A, const std::vector<double>& x,
                                       std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    s += A.diag[i] * x[i] * x[i];
    if (i < hi) s += 2.0 * A.off[i] * x[i] * x[i + 1];
  }
  return s;
}

// Thomas algorithm on the window block A[lo..hi, lo..hi]; rhs and the result
// are full-length vectors, entries outside the window are left untouched in
// the result (callers zero them as needed). No pivoting: the blocks fed in
// here are positive definite (stiffness + positive-weight mass).
inline void tridiag_solve_window(const Tridiag& A, const std::vector<double>& rhs,
                                 std::size_t lo, std::size_t hi, std::vector<double>& x,
                                 std::vector<double>& work_c, std::vector<double>& work_d) {
  const std::size_t n = hi - lo + 1;
  work_c.resize(n);
  work_d.resize(n);
  double piv = A.diag[lo];
  if (piv == 0.0) throw std::runtime_error("tridiagonal solve hit a zero pivot");
  work_c[0] = (n > 1) ? A.off[lo] / piv : 0.0;
  work_d[0] = rhs[lo] / piv;
  for (std::size_t j = 1; j < n; ++j) {
    const std::size_t i = lo + j;
    piv = A.diag[i] - A.off[i - 1] * work_c[j - 1];
    if (piv == 0.0) throw std::runtime_error("tridiagonal solve hit a zero pivot");
    work_c[j] = (j + 1 < n) ? A.off[i] / piv : 0.0;
    work_d[j] = (rhs[i] - A.off[i - 1] * work_d[j - 1]) / piv;
  }
  x[hi] = work_d[n - 1];
  for (std::size_t j = n - 1; j-- > 0;) x[lo + j] = work_d[j] - work_c[j] * x[lo + j + 1];
}

inline std::vector<double> tridiag_solve_window(const Tridiag& A, const std::vector<double>& rhs,
                                                std::size_t lo, std::size_t hi) {
  std::vector<double> x(rhs.size(), 0.0), c, d;
  tridiag_solve_window(A, rhs, lo, hi, x, c, d);
  return x;
}

}  // namespace knodal
