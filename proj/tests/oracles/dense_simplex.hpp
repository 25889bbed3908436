#pragma once

// Two-phase tableau simplex with Bland's rule, for small dense programs:
//   min c'x  s.t.  A x = b,  x >= 0.
// Slow and simple on purpose; used only to check the production solver.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

inline LpResult dense_simplex(std::vector<std::vector<double>> A, std::vector<double> b, const std::vector<double>& c,
                              double eps = 1e-9) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0) {
      for (double& v : A[i]) v = -v;
      b[i] = -b[i];
    }
  }
  // Columns: n structural, m artificial, then rhs.
  const std::size_t cols = n + m + 1;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][cols - 1] = b[i];
    basis[i] = n + i;
  }

  auto pivot = [&](std::size_t r, std::size_t col) {
    const double p = T[r][col];
    for (double& v : T[r]) v /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r || T[i][col] == 0.0) continue;
      const double f = T[i][col];
      for (std::size_t j = 0; j < cols; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = col;
  };

  // Returns false when unbounded. `allowed` limits entering columns.
  auto run = [&](std::size_t allowed) {
    for (int guard = 0; guard < 100000; ++guard) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (T[m][j] < -eps) {
          enter = j;  // Bland: lowest index
          break;
        }
      }
      if (enter == cols) return true;
      std::size_t leave = m;
      double best = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (T[i][enter] > eps) {
          double ratio = T[i][cols - 1] / T[i][enter];
          if (leave == m || ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis[i] < basis[leave])) {
            leave = i;
            best = ratio;
          }
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
    return true;
  };

  // Phase 1: minimize the sum of artificials.
  for (std::size_t j = 0; j < cols; ++j) T[m][j] = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (j < n || j == cols - 1) T[m][j] -= T[i][j];
  run(n + m);
  LpResult res;
  if (-T[m][cols - 1] > 1e-7 * (1.0 + [&] {
        double s = 0;
        for (double v : b) s += v;
        return s;
      }())) {
    res.status = LpStatus::infeasible;
    return res;
  }
  // Drive artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(T[i][j]) > eps) {
        pivot(i, j);
        break;
      }
    }
  }
  // Phase 2 with artificial columns frozen out.
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n)
      for (std::size_t j = n; j < n + m; ++j) T[i][j] = 0.0;
  for (std::size_t j = 0; j < cols; ++j) T[m][j] = j < n ? c[j] : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n && T[m][basis[i]] != 0.0) {
      const double f = T[m][basis[i]];
      for (std::size_t j = 0; j < cols; ++j) T[m][j] -= f * T[i][j];
    }
  }
  if (!run(n)) {
    res.status = LpStatus::unbounded;
    return res;
  }
  res.status = LpStatus::optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = T[i][cols - 1];
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

}  // namespace oracle
