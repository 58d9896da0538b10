#include "potlab/capacity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>

#include "potlab/errors.hpp"
#include "potlab/parallel.hpp"
#include "potlab/quadrature.hpp"

namespace potlab {
namespace {

using IVec = std::array<std::int64_t, kMaxDim>;

bool cell_less(const CellIndex& a, const CellIndex& b) { return a < b; }

double riesz_unit(const Vec& z) {
  const double s = norm2(z);
  switch (z.dim()) {
    case 2: return 1.0 / std::sqrt(s);
    case 3: return 1.0 / s;
    default: return std::pow(s, 0.5 * (1 - z.dim()));
  }
}

/// Signed permutation x -> (sign_i x_{perm_i}).
struct SignedPermutation {
  std::array<int, kMaxDim> perm{};
  std::array<int, kMaxDim> sign{};

  IVec apply(const IVec& v, int dim) const {
    IVec out{};
    for (int i = 0; i < dim; ++i) out[i] = sign[i] * v[perm[i]];
    return out;
  }
};

std::vector<SignedPermutation> hyperoctahedral_group(int dim) {
  std::vector<SignedPermutation> group;
  std::array<int, kMaxDim> perm{};
  std::iota(perm.begin(), perm.begin() + dim, 0);
  do {
    for (int mask = 0; mask < (1 << dim); ++mask) {
      SignedPermutation g;
      g.perm = perm;
      for (int i = 0; i < dim; ++i) g.sign[i] = (mask >> i & 1) ? -1 : 1;
      group.push_back(g);
    }
  } while (std::next_permutation(perm.begin(), perm.begin() + dim));
  return group;
}

/// Offsets of the constraint points inside a cell, in units of h / (2 refinement).
std::vector<IVec> constraint_offsets(int dim, int ref) {
  std::vector<IVec> out{IVec{}};
  if (ref == 1) return out;
  CellIndex lo{}, hi{};
  for (int i = 0; i < dim; ++i) hi[i] = ref;
  GridSpec::for_each_in(dim, lo, hi, [&](const CellIndex& idx) {
    IVec o{};
    for (int i = 0; i < dim; ++i) o[i] = 2 * idx[i] + 1 - ref;
    if (o != IVec{}) out.push_back(o);
  });
  return out;
}

/// Memoized unit-cell potentials keyed by integer offsets in units of 1 / (2 ref).
class PhiTable {
 public:
  PhiTable(int dim, int ref, int order) : dim_(dim), ref_(ref), order_(order) {}

  double operator()(const IVec& off) const {
    std::int64_t inf = 0;
    for (int i = 0; i < dim_; ++i) inf = std::max<std::int64_t>(inf, std::abs(off[i]));
    Vec p(dim_);
    for (int i = 0; i < dim_; ++i) p[i] = static_cast<double>(off[i]) / (2.0 * ref_);
    if (inf >= 3 * ref_) return riesz_unit(p);
    IVec key{};
    for (int i = 0; i < dim_; ++i) key[i] = std::abs(off[i]);
    std::sort(key.begin(), key.begin() + dim_);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const double v = unit_cell_potential(p, order_);
    std::lock_guard lock(mutex_);
    cache_.emplace(key, v);
    return v;
  }

 private:
  int dim_, ref_, order_;
  mutable std::mutex mutex_;
  mutable std::map<IVec, double> cache_;
};

struct Reduction {
  std::vector<std::vector<std::size_t>> orbits;  // cell orbits
  std::vector<std::size_t> orbit_of;             // cell -> orbit
  std::vector<std::pair<std::size_t, std::size_t>> point_reps;  // (cell, offset index)
  std::size_t group_order = 1;
};

Reduction reduce(const DiscreteSet& E, const std::vector<IVec>& offsets, bool use_symmetry) {
  const int dim = E.dimension();
  const std::size_t n = E.size();
  // Doubled centers relative to the centroid, scaled by n to stay integral.
  std::vector<IVec> q(n);
  IVec sum{};
  for (std::size_t c = 0; c < n; ++c)
    for (int i = 0; i < dim; ++i) {
      q[c][i] = 2 * static_cast<std::int64_t>(E.cells()[c][i]) + 1;
      sum[i] += q[c][i];
    }
  std::vector<IVec> d(n);
  for (std::size_t c = 0; c < n; ++c)
    for (int i = 0; i < dim; ++i) d[c][i] = static_cast<std::int64_t>(n) * q[c][i] - sum[i];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  auto find_cell = [&](const IVec& v) -> std::optional<std::size_t> {
    auto it = std::lower_bound(order.begin(), order.end(), v, [&](std::size_t a, const IVec& x) { return d[a] < x; });
    if (it == order.end() || d[*it] != v) return std::nullopt;
    return *it;
  };

  std::vector<SignedPermutation> group;
  if (use_symmetry) {
    for (const SignedPermutation& g : hyperoctahedral_group(dim)) {
      bool ok = true;
      for (std::size_t c = 0; c < n && ok; ++c) ok = find_cell(g.apply(d[c], dim)).has_value();
      if (ok) group.push_back(g);
    }
  } else {
    SignedPermutation id;
    std::iota(id.perm.begin(), id.perm.begin() + dim, 0);
    std::fill(id.sign.begin(), id.sign.end(), 1);
    group.push_back(id);
  }

  std::vector<std::vector<std::size_t>> image(group.size(), std::vector<std::size_t>(n));
  for (std::size_t gi = 0; gi < group.size(); ++gi)
    for (std::size_t c = 0; c < n; ++c) image[gi][c] = *find_cell(group[gi].apply(d[c], dim));

  Reduction red;
  red.group_order = group.size();
  red.orbit_of.assign(n, SIZE_MAX);
  for (std::size_t c = 0; c < n; ++c) {
    if (red.orbit_of[c] != SIZE_MAX) continue;
    const std::size_t id = red.orbits.size();
    red.orbits.emplace_back();
    for (std::size_t gi = 0; gi < group.size(); ++gi) {
      const std::size_t e = image[gi][c];
      if (red.orbit_of[e] == SIZE_MAX) {
        red.orbit_of[e] = id;
        red.orbits[id].push_back(e);
      }
    }
  }

  std::map<IVec, std::size_t> offset_index;
  for (std::size_t o = 0; o < offsets.size(); ++o) offset_index.emplace(offsets[o], o);
  std::vector<std::vector<bool>> seen(n, std::vector<bool>(offsets.size(), false));
  // Centers first so that constraint generation can start from them.
  for (std::size_t o = 0; o < offsets.size(); ++o)
    for (std::size_t c = 0; c < n; ++c) {
      if (seen[c][o]) continue;
      red.point_reps.emplace_back(c, o);
      for (std::size_t gi = 0; gi < group.size(); ++gi)
        seen[image[gi][c]][offset_index.at(group[gi].apply(offsets[o], dim))] = true;
    }
  return red;
}

}  // namespace

DiscreteSet::DiscreteSet(Vec anchor, double h, std::vector<CellIndex> cells)
    : anchor_(std::move(anchor)), h_(h), cells_(std::move(cells)) {
  if (!(h > 0.0)) throw InvalidArgument("set mesh h must be positive");
  for (CellIndex& c : cells_)
    for (int i = dimension(); i < kMaxDim; ++i) c[i] = 0;
  std::sort(cells_.begin(), cells_.end(), cell_less);
  if (std::adjacent_find(cells_.begin(), cells_.end()) != cells_.end())
    throw InvalidArgument("set cells must be pairwise distinct");
}

Vec DiscreteSet::center(std::size_t i) const {
  Vec c(dimension());
  for (int a = 0; a < dimension(); ++a) c[a] = anchor_[a] + h_ * (cells_[i][a] + 0.5);
  return c;
}

double DiscreteSet::measure() const { return static_cast<double>(cells_.size()) * std::pow(h_, dimension()); }

DiscreteSet DiscreteSet::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw InvalidArgument("scale factor must be positive");
  return DiscreteSet(anchor_ * lambda, h_ * lambda, cells_);
}

DiscreteSet DiscreteSet::translated(const Vec& shift) const { return DiscreteSet(anchor_ + shift, h_, cells_); }

bool DiscreteSet::contains(const CellIndex& cell) const {
  CellIndex key = cell;
  for (int i = dimension(); i < kMaxDim; ++i) key[i] = 0;
  return std::binary_search(cells_.begin(), cells_.end(), key, cell_less);
}

DiscreteSet DiscreteSet::from_mask(const GridSpec& grid, const std::vector<bool>& mask) {
  if (mask.size() != grid.cell_count()) throw InvalidArgument("mask size does not match grid");
  std::vector<CellIndex> cells;
  for (std::size_t f = 0; f < mask.size(); ++f)
    if (mask[f]) cells.push_back(grid.unflatten(f));
  return DiscreteSet(grid.origin(), grid.h(), std::move(cells));
}

DiscreteSet DiscreteSet::ball(const Vec& center, double r, double h, const Vec& anchor) {
  const int dim = center.dim();
  if (anchor.dim() != dim) throw InvalidArgument("anchor dimension mismatch");
  CellIndex lo{}, hi{};
  for (int i = 0; i < dim; ++i) {
    lo[i] = static_cast<int>(std::floor((center[i] - r - anchor[i]) / h)) - 1;
    hi[i] = static_cast<int>(std::ceil((center[i] + r - anchor[i]) / h)) + 2;
  }
  std::vector<CellIndex> cells;
  GridSpec::for_each_in(dim, lo, hi, [&](const CellIndex& k) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double y = anchor[i] + h * (k[i] + 0.5) - center[i];
      s += y * y;
    }
    if (s <= r * r) cells.push_back(k);
  });
  return DiscreteSet(anchor, h, std::move(cells));
}

double unit_cell_potential(const Vec& p, int quadrature_order) {
  const int dim = p.dim();
  double inf = 0.0;
  for (int i = 0; i < dim; ++i) inf = std::max(inf, std::abs(p[i]));
  if (inf >= 1.5) return riesz_unit(p);
  const Vec lo = Vec::filled(dim, -0.5), hi = Vec::filled(dim, 0.5);
  return integrate_box_singular(
      [&](const Vec& y) {
        const Vec z = p - y;
        return norm2(z) == 0.0 ? 0.0 : riesz_unit(z);
      },
      lo, hi, p, quadrature_order, 0.0);
}

CapacityEstimate capacity_lp(const DiscreteSet& E, const CapacityOptions& opts) {
  if (E.empty()) throw InvalidArgument("capacity_lp needs a nonempty set");
  if (opts.refinement < 1) throw InvalidArgument("refinement must be >= 1");
  const int dim = E.dimension();
  const int ref = opts.refinement;
  const std::size_t n = E.size();
  const auto offsets = constraint_offsets(dim, ref);
  const Reduction red = reduce(E, offsets, opts.use_symmetry);
  const std::size_t vars = red.orbits.size(), rows = red.point_reps.size();
  const PhiTable phi(dim, ref, opts.quadrature_order);

  // Reduced constraint matrix: row = representative point, column = cell orbit.
  DenseMatrix full(rows, vars);
  parallel_for(rows, [&](std::size_t r) {
    const auto [pc, po] = red.point_reps[r];
    IVec p{};
    for (int i = 0; i < dim; ++i) p[i] = ref * (2 * static_cast<std::int64_t>(E.cells()[pc][i]) + 1) + offsets[po][i];
    double* row = full.data.data() + r * vars;
    for (std::size_t c = 0; c < n; ++c) {
      IVec off{};
      for (int i = 0; i < dim; ++i) off[i] = p[i] - ref * (2 * static_cast<std::int64_t>(E.cells()[c][i]) + 1);
      row[red.orbit_of[c]] += phi(off);
    }
  });

  std::vector<double> cost(vars);
  for (std::size_t j = 0; j < vars; ++j) cost[j] = static_cast<double>(red.orbits[j].size());

  std::vector<std::size_t> active;
  if (opts.constraint_generation) {
    for (std::size_t r = 0; r < rows; ++r)
      if (red.point_reps[r].second == 0) active.push_back(r);
  } else {
    active.resize(rows);
    std::iota(active.begin(), active.end(), 0);
  }

  std::vector<double> x;
  std::size_t iterations = 0;
  std::vector<double> ax(rows);
  while (true) {
    DenseMatrix A(active.size(), vars);
    for (std::size_t i = 0; i < active.size(); ++i)
      std::copy_n(full.data.begin() + active[i] * vars, vars, A.data.begin() + i * vars);
    const LpResult lp = maximize(cost, A, std::vector<double>(active.size(), 1.0), opts.lp);
    iterations += lp.iterations;
    x = lp.x;
    std::vector<std::size_t> violated;
    std::vector<bool> is_active(rows, false);
    for (std::size_t r : active) is_active[r] = true;
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < vars; ++j) s += full(r, j) * x[j];
      ax[r] = s;
      if (!is_active[r] && s > 1.0 + 1e-12) violated.push_back(r);
    }
    if (violated.empty()) break;
    active.insert(active.end(), violated.begin(), violated.end());
    std::sort(active.begin(), active.end());
  }

  double worst = *std::max_element(ax.begin(), ax.end());
  if (worst > 1.0) {
    for (double& v : x) v /= worst;
    for (double& v : ax) v /= worst;
    worst = 1.0;
  }

  CapacityEstimate est;
  const double scale = std::pow(E.h(), dim - 1);
  est.mesh = E.h();
  est.constraint_points = n * offsets.size();
  est.weights.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    est.weights[c] = x[red.orbit_of[c]] * scale;
    total += est.weights[c];
  }
  est.value = total;
  est.certificate_max_constraint = worst;
  est.variables = vars;
  est.constraints_used = active.size();
  est.symmetry_order = red.group_order;
  est.iterations = iterations;
  return est;
}

CapacityEstimate capacity_of_ball(int dim, double r, double h, BallAlignment align, const CapacityOptions& opts) {
  if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
  if (!(h > 0.0) || h > r / 8.0 * (1.0 + 1e-12)) throw InvalidArgument("capacity_of_ball requires 0 < h <= r/8");
  const Vec center = Vec::zero(dim);
  const Vec anchor = align == BallAlignment::vertex ? center : center - Vec::filled(dim, h / 2.0);
  return capacity_lp(DiscreteSet::ball(center, r, h, anchor), opts);
}

std::vector<double> cell_averaged_riesz_potential(const RadonMeasure& mu, const GridSpec& window,
                                                  int quadrature_order) {
  if (window.dim() != mu.dimension()) throw InvalidArgument("window dimension mismatch");
  const int dim = mu.dimension();
  std::vector<Atom> sources = mu.atoms();
  if (const auto& dens = mu.density())
    for (std::size_t f = 0; f < dens->values.size(); ++f)
      if (dens->values[f] != 0.0) sources.push_back({dens->grid.center(f), dens->values[f] * dens->grid.cell_volume()});
  const double h = window.h();
  const double scale = std::pow(h, 1 - dim);
  std::vector<double> out(window.cell_count(), 0.0);
  parallel_for(window.cell_count(), [&](std::size_t f) {
    const Vec c = window.center(f);
    double s = 0.0;
    for (const Atom& a : sources) s += a.weight * unit_cell_potential((a.location - c) * (1.0 / h), quadrature_order);
    out[f] = s * scale;
  });
  return out;
}

WeakNormReport weak_capacity_norm(const RadonMeasure& mu, const GridSpec& window, std::span<const double> t_samples,
                                  const CapacityOptions& opts) {
  if (!mu.is_nonnegative()) throw InvalidArgument("weak_capacity_norm needs a nonnegative measure");
  WeakNormReport rep;
  rep.total_variation = total_variation(mu);
  if (mu.is_zero()) {
    for (double t : t_samples) rep.levels.push_back({t, 0, 0.0, 0.0});
    return rep;
  }
  const auto pot = cell_averaged_riesz_potential(mu, window, opts.quadrature_order);
  for (double t : t_samples) {
    if (!(t > 0.0)) throw InvalidArgument("t samples must be positive");
    std::vector<bool> mask(pot.size());
    for (std::size_t f = 0; f < pot.size(); ++f) mask[f] = pot[f] > t;
    const DiscreteSet E = DiscreteSet::from_mask(window, mask);
    WeakCapacityLevel lvl{t, E.size(), 0.0, 0.0};
    if (!E.empty()) lvl.capacity = capacity_lp(E, opts).value;
    lvl.t_times_capacity = t * lvl.capacity;
    if (lvl.t_times_capacity > rep.sup) {
      rep.sup = lvl.t_times_capacity;
      rep.argsup_t = t;
    }
    rep.levels.push_back(lvl);
  }
  return rep;
}

LebesgueCapacityRatio lebesgue_capacity_check(const DiscreteSet& E, const CapacityOptions& opts) {
  if (E.empty()) throw InvalidArgument("lebesgue_capacity_check needs a nonempty set");
  LebesgueCapacityRatio out;
  out.measure = E.measure();
  out.capacity = capacity_lp(E, opts).value;
  const int n = E.dimension();
  out.ratio = std::pow(out.measure, (n - 1.0) / n) / out.capacity;
  return out;
}

}  // namespace potlab
