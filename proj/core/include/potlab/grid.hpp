#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "potlab/vec.hpp"

namespace potlab {

using CellIndex = std::array<int, kMaxDim>;

/// Uniform axis-aligned grid of cubes of side h; cell k spans origin + h*[k, k+1).
/// Flat indices are row-major with the first axis slowest.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(Vec origin, double h, const std::vector<int>& shape);

  int dim() const { return origin_.dim(); }
  const Vec& origin() const { return origin_; }
  double h() const { return h_; }
  int extent(int axis) const { return shape_[axis]; }
  std::vector<int> shape() const { return {shape_.begin(), shape_.begin() + dim()}; }
  std::size_t cell_count() const { return count_; }
  double cell_volume() const;

  CellIndex unflatten(std::size_t flat) const;
  std::size_t flatten(const CellIndex& idx) const;
  Vec center(const CellIndex& idx) const;
  Vec center(std::size_t flat) const { return center(unflatten(flat)); }
  Vec lower(const CellIndex& idx) const;
  /// Cell containing x (half-open), if inside the grid.
  std::optional<std::size_t> locate(const Vec& x) const;
  /// Index range (inclusive lo, exclusive hi per axis) of cells meeting the box [lo, hi].
  std::pair<CellIndex, CellIndex> cell_range(const Vec& lo, const Vec& hi) const;
  std::vector<Vec> centers() const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.origin_ == b.origin_ && a.h_ == b.h_ && a.shape_ == b.shape_;
  }

  /// Visit every index in a per-axis half-open range.
  template <class F>
  static void for_each_in(int dim, const CellIndex& lo, const CellIndex& hi, F&& f) {
    for (int i = 0; i < dim; ++i)
      if (lo[i] >= hi[i]) return;
    CellIndex idx = lo;
    while (true) {
      f(idx);
      int i = dim - 1;
      while (i >= 0 && ++idx[i] == hi[i]) {
        idx[i] = lo[i];
        --i;
      }
      if (i < 0) break;
    }
  }

 private:
  Vec origin_;
  double h_ = 0.0;
  CellIndex shape_{};
  std::size_t count_ = 0;
};

/// Grid that covers the box [lo, hi] with cells of side h, origin snapped down to lo.
GridSpec covering_grid(const Vec& lo, const Vec& hi, double h);

}  // namespace potlab
