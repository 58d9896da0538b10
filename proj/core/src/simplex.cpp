#include "potlab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "potlab/errors.hpp"

namespace potlab {

LpResult maximize(const std::vector<double>& c, const DenseMatrix& A, const std::vector<double>& b,
                  const LpOptions& opts) {
  const std::size_t m = A.rows, n = A.cols;
  if (c.size() != n || b.size() != m || A.data.size() != m * n) throw InvalidArgument("LP shape mismatch");
  for (double v : b)
    if (!(v >= 0.0)) throw InvalidArgument("LP right-hand side must be nonnegative");

  // Compact tableau: row i holds basic variable basic[i] = rhs - sum_j T(i,j) nonbasic[j].
  // Variables 0..n-1 are structural, n..n+m-1 slacks. The last row is the objective row.
  const std::size_t w = n + 1;
  std::vector<double> T((m + 1) * w);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(A.data.begin() + i * n, A.data.begin() + (i + 1) * n, T.begin() + i * w);
    T[i * w + n] = b[i];
  }
  double* obj = T.data() + m * w;
  for (std::size_t j = 0; j < n; ++j) obj[j] = -c[j];
  std::vector<std::size_t> nonbasic(n), basic(m);
  for (std::size_t j = 0; j < n; ++j) nonbasic[j] = j;
  for (std::size_t i = 0; i < m; ++i) basic[i] = n + i;

  const double tol = opts.tolerance;
  std::size_t iter = 0, stalled = 0;
  std::vector<double> pivot_row(w);
  while (true) {
    const bool bland = opts.rule == PivotRule::bland || stalled >= opts.stall_limit;
    std::size_t s = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (obj[j] >= -tol) continue;
      if (s == n || (bland ? nonbasic[j] < nonbasic[s] : obj[j] < obj[s])) s = j;
    }
    if (s == n) break;
    if (iter++ >= opts.max_iterations) throw SolverError("simplex iteration cap exceeded");

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = T[i * w + s];
      if (a > tol) best = std::min(best, T[i * w + n] / a);
    }
    // Among near-minimal ratios: smallest label under Bland's rule, largest pivot otherwise.
    std::size_t r = m;
    const double slack = 1e-13 * (1.0 + best);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = T[i * w + s];
      if (a <= tol || T[i * w + n] / a > best + slack) continue;
      if (r == m || (bland ? basic[i] < basic[r] : a > T[r * w + s])) r = i;
    }
    if (r == m) throw SolverError("LP is unbounded");

    const double before = obj[n];
    const double p = T[r * w + s];
    double* row = T.data() + r * w;
    for (std::size_t j = 0; j < w; ++j) row[j] /= p;
    row[s] = 1.0 / p;
    std::copy(row, row + w, pivot_row.begin());
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r) continue;
      double* ti = T.data() + i * w;
      const double f = ti[s];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) ti[j] -= f * pivot_row[j];
      ti[s] = -f / p;
    }
    std::swap(basic[r], nonbasic[s]);
    stalled = obj[n] > before + 1e-14 * (1.0 + std::abs(before)) ? 0 : stalled + 1;
  }

  LpResult out;
  out.iterations = iter;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basic[i] < n) out.x[basic[i]] = std::max(0.0, T[i * w + n]);

  // Recompute feasibility from the original data and pull x back inside if rounding pushed it out.
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += A(i, j) * out.x[j];
    if (b[i] > 0.0)
      worst = std::max(worst, ax / b[i]);
    else if (ax > opts.tolerance)
      worst = std::numeric_limits<double>::infinity();
  }
  if (worst > 1.0 && std::isfinite(worst)) {
    for (double& v : out.x) v /= worst;
    worst = 1.0;
  }
  out.max_constraint_ratio = worst;
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
  return out;
}

}  // namespace potlab
