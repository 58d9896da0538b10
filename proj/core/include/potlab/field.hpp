#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potlab/grid.hpp"
#include "potlab/vec.hpp"

namespace potlab {

enum class FieldKind { potential, gradient, maximal, truncated_singular, maximal_singular, remainder, dominating,
                       second_derivative };

const char* to_string(FieldKind kind);

/// Values of a scalar or N-vector field at a list of points; vector values are stored
/// point-major, `components` entries per point.
struct FieldSample {
  FieldKind kind = FieldKind::potential;
  std::vector<Vec> points;
  int components = 1;
  std::vector<double> values;
  /// Grid the points were taken from, when they are cell centers.
  std::optional<GridSpec> grid;
  /// Maxima over finite radius or epsilon lists only bound the true supremum from below.
  bool lower_bound = false;

  /// Zero-valued sample over `points`.
  static FieldSample zeros(FieldKind kind, std::vector<Vec> points, int components = 1);

  std::size_t size() const { return points.size(); }
  double at(std::size_t i, int c = 0) const { return values[i * components + c]; }
  Vec vector_at(std::size_t i) const;
};

/// Strictly decreasing positive radii, at least three of them.
class EpsilonSchedule {
 public:
  /// Throws InvalidArgument unless the entries are positive, strictly decreasing and >= 3.
  explicit EpsilonSchedule(std::vector<double> entries);
  /// 2^{-j}, j = first..last.
  static EpsilonSchedule dyadic(int first = 0, int last = 40);
  /// base * ratio^j, j = 0..count-1, ratio in (0, 1).
  static EpsilonSchedule geometric(double base, double ratio, int count);

  const std::vector<double>& entries() const { return entries_; }

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::vector<double> entries_;
};

}  // namespace potlab
