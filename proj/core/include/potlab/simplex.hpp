#pragma once

#include <cstddef>
#include <vector>

namespace potlab {

enum class PivotRule {
  /// Smallest-index entering and leaving variables; never cycles.
  bland,
  /// Most negative reduced cost, switching to Bland's rule while the objective stalls.
  dantzig,
};

struct LpOptions {
  PivotRule rule = PivotRule::dantzig;
  std::size_t max_iterations = 200000;
  double tolerance = 1e-11;
  /// Degenerate pivots in a row before the dantzig rule falls back to Bland's rule.
  std::size_t stall_limit = 50;
};

/// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct LpResult {
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
  /// max_i (A x)_i / b_i for the returned x (<= 1 + tolerance for a feasible point).
  double max_constraint_ratio = 0.0;
};

/// maximize c^T x subject to A x <= b, x >= 0, with b >= 0 so the slack basis is feasible.
/// Dense tableau simplex; the problem is bounded when A >= 0 has a positive entry in every column.
/// Throws SolverError when max_iterations is exceeded or the problem is unbounded, and
/// InvalidArgument on shape errors or negative b.
LpResult maximize(const std::vector<double>& c, const DenseMatrix& A, const std::vector<double>& b,
                  const LpOptions& opts = {});

}  // namespace potlab
