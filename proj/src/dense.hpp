#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace knodal {

// Gaussian elimination with partial pivoting on a dense n×n row-major system.
// The systems in this code base are tiny (one row per component), so nothing
// fancier is warranted. A and rhs are overwritten; the solution lands in rhs.
// Returns false on (numerical) singularity.
inline bool dense_solve(std::vector<double>& A, std::vector<double>& rhs, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::fabs(A[static_cast<std::size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::fabs(A[static_cast<std::size_t>(r) * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > 0.0)) return false;
    if (pivot != col) {
      for (int c = col; c < n; ++c)
        std::swap(A[static_cast<std::size_t>(pivot) * n + c],
                  A[static_cast<std::size_t>(col) * n + c]);
      std::swap(rhs[static_cast<std::size_t>(pivot)], rhs[static_cast<std::size_t>(col)]);
    }
    const double inv = 1.0 / A[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = A[static_cast<std::size_t>(r) * n + col] * inv;
      if (f == 0.0) continue;
      A[static_cast<std::size_t>(r) * n + col] = 0.0;
      for (int c = col + 1; c < n; ++c)
        A[static_cast<std::size_t>(r) * n + c] -= f * A[static_cast<std::size_t>(col) * n + c];
      rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = rhs[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c)
      acc -= A[static_cast<std::size_t>(r) * n + c] * rhs[static_cast<std::size_t>(c)];
    rhs[static_cast<std::size_t>(r)] = acc / A[static_cast<std::size_t>(r) * n + r];
  }
  return true;
}

}  // namespace knodal
