#include "potlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "potlab/errors.hpp"

namespace potlab {

GridSpec::GridSpec(Vec origin, double h, const std::vector<int>& shape) : origin_(std::move(origin)), h_(h) {
  if (!(h > 0.0)) throw InvalidArgument("grid cell side must be positive");
  if (static_cast<int>(shape.size()) != origin_.dim()) throw InvalidArgument("grid shape does not match dimension");
  count_ = 1;
  for (int i = 0; i < origin_.dim(); ++i) {
    if (shape[i] <= 0) throw InvalidArgument("grid shape entries must be positive");
    shape_[i] = shape[i];
    count_ *= static_cast<std::size_t>(shape[i]);
  }
}

double GridSpec::cell_volume() const { return std::pow(h_, dim()); }

CellIndex GridSpec::unflatten(std::size_t flat) const {
  CellIndex idx{};
  for (int i = dim() - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % shape_[i]);
    flat /= shape_[i];
  }
  return idx;
}

std::size_t GridSpec::flatten(const CellIndex& idx) const {
  std::size_t flat = 0;
  for (int i = 0; i < dim(); ++i) flat = flat * shape_[i] + idx[i];
  return flat;
}

Vec GridSpec::center(const CellIndex& idx) const {
  Vec c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = origin_[i] + h_ * (idx[i] + 0.5);
  return c;
}

Vec GridSpec::lower(const CellIndex& idx) const {
  Vec c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = origin_[i] + h_ * idx[i];
  return c;
}

std::optional<std::size_t> GridSpec::locate(const Vec& x) const {
  CellIndex idx{};
  for (int i = 0; i < dim(); ++i) {
    const double u = std::floor((x[i] - origin_[i]) / h_);
    if (u < 0.0 || u >= shape_[i]) return std::nullopt;
    idx[i] = static_cast<int>(u);
  }
  return flatten(idx);
}

std::pair<CellIndex, CellIndex> GridSpec::cell_range(const Vec& lo, const Vec& hi) const {
  CellIndex a{}, b{};
  for (int i = 0; i < dim(); ++i) {
    const double l = std::floor((lo[i] - origin_[i]) / h_);
    const double u = std::floor((hi[i] - origin_[i]) / h_) + 1.0;
    a[i] = static_cast<int>(std::clamp(l, 0.0, static_cast<double>(shape_[i])));
    b[i] = static_cast<int>(std::clamp(u, 0.0, static_cast<double>(shape_[i])));
  }
  return {a, b};
}

std::vector<Vec> GridSpec::centers() const {
  std::vector<Vec> out;
  out.reserve(count_);
  for (std::size_t f = 0; f < count_; ++f) out.push_back(center(f));
  return out;
}

GridSpec covering_grid(const Vec& lo, const Vec& hi, double h) {
  std::vector<int> shape(lo.dim());
  for (int i = 0; i < lo.dim(); ++i) shape[i] = std::max(1, static_cast<int>(std::ceil((hi[i] - lo[i]) / h - 1e-9)));
  return GridSpec(lo, h, shape);
}

}  // namespace potlab
