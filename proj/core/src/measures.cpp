#include "potlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

#include "potlab/errors.hpp"
#include "potlab/quadrature.hpp"

namespace potlab {
namespace {

bool lex_less(const Vec& a, const Vec& b) { return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()); }

/// Stratified jittered points in the unit cube, cached per (dim, samples, seed).
const std::vector<Vec>& overlap_pattern(int dim, int samples, std::uint64_t seed) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, std::uint64_t>, std::vector<Vec>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(dim, samples, seed);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const int per_axis = std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(samples), 1.0 / dim))));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> pts;
  CellIndex lo{}, hi{};
  for (int i = 0; i < dim; ++i) hi[i] = per_axis;
  GridSpec::for_each_in(dim, lo, hi, [&](const CellIndex& idx) {
    Vec p(dim);
    for (int i = 0; i < dim; ++i) p[i] = (idx[i] + unif(rng)) / per_axis;
    pts.push_back(p);
  });
  return cache.emplace(key, std::move(pts)).first->second;
}

}  // namespace

RadonMeasure::RadonMeasure(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("measure dimension out of range");
}

RadonMeasure::RadonMeasure(int dim, std::vector<Atom> atoms, std::optional<DensityGrid> density)
    : dim_(dim), atoms_(std::move(atoms)), density_(std::move(density)) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("measure dimension out of range");
  for (const Atom& a : atoms_) {
    if (a.location.dim() != dim) throw InvalidArgument("atom dimension does not match measure dimension");
    if (!std::isfinite(a.weight)) throw InvalidArgument("atom weight must be finite");
  }
  std::vector<const Vec*> locs;
  locs.reserve(atoms_.size());
  for (const Atom& a : atoms_) locs.push_back(&a.location);
  std::sort(locs.begin(), locs.end(), [](const Vec* a, const Vec* b) { return lex_less(*a, *b); });
  for (std::size_t i = 1; i < locs.size(); ++i)
    if (*locs[i] == *locs[i - 1]) throw InvalidArgument("atom locations must be pairwise distinct");
  if (density_) {
    if (density_->grid.dim() != dim) throw InvalidArgument("density grid dimension does not match measure");
    if (density_->values.size() != density_->grid.cell_count())
      throw InvalidArgument("density values do not match the grid cell count");
    for (double v : density_->values)
      if (!std::isfinite(v)) throw InvalidArgument("density values must be finite");
  }
}

std::optional<double> RadonMeasure::mesh() const {
  if (!density_) return std::nullopt;
  return density_->grid.h();
}

bool RadonMeasure::is_nonnegative() const {
  for (const Atom& a : atoms_)
    if (a.weight < 0.0) return false;
  if (density_)
    for (double v : density_->values)
      if (v < 0.0) return false;
  return true;
}

bool RadonMeasure::is_zero() const { return total_variation(*this) == 0.0; }

RadonMeasure RadonMeasure::scaled(double alpha) const {
  RadonMeasure out = *this;
  for (Atom& a : out.atoms_) a.weight *= alpha;
  if (out.density_)
    for (double& v : out.density_->values) v *= alpha;
  return out;
}

RadonMeasure RadonMeasure::translated(const Vec& shift) const {
  if (shift.dim() != dim_) throw InvalidArgument("shift dimension mismatch");
  std::vector<Atom> atoms = atoms_;
  for (Atom& a : atoms) a.location += shift;
  std::optional<DensityGrid> dens;
  if (density_) {
    const GridSpec& g = density_->grid;
    dens = DensityGrid{GridSpec(g.origin() + shift, g.h(), g.shape()), density_->values};
  }
  return RadonMeasure(dim_, std::move(atoms), std::move(dens));
}

RadonMeasure operator+(const RadonMeasure& a, const RadonMeasure& b) {
  if (a.dim_ != b.dim_) throw InvalidArgument("cannot add measures of different dimensions");
  std::vector<Atom> atoms = a.atoms_;
  atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return lex_less(x.location, y.location); });
  std::vector<Atom> merged;
  for (const Atom& at : atoms) {
    if (!merged.empty() && merged.back().location == at.location)
      merged.back().weight += at.weight;
    else
      merged.push_back(at);
  }
  std::optional<DensityGrid> dens;
  if (a.density_ && b.density_) {
    if (!(a.density_->grid == b.density_->grid)) throw InvalidArgument("cannot add densities on different grids");
    dens = a.density_;
    for (std::size_t i = 0; i < dens->values.size(); ++i) dens->values[i] += b.density_->values[i];
  } else {
    dens = a.density_ ? a.density_ : b.density_;
  }
  return RadonMeasure(a.dim_, std::move(merged), std::move(dens));
}

double total_variation(const RadonMeasure& mu) {
  double tv = 0.0;
  for (const Atom& a : mu.atoms()) tv += std::abs(a.weight);
  if (const auto& d = mu.density()) {
    double s = 0.0;
    for (double v : d->values) s += std::abs(v);
    tv += s * d->grid.cell_volume();
  }
  return tv;
}

double total_mass(const RadonMeasure& mu) {
  double m = 0.0;
  for (const Atom& a : mu.atoms()) m += a.weight;
  if (const auto& d = mu.density()) {
    double s = 0.0;
    for (double v : d->values) s += v;
    m += s * d->grid.cell_volume();
  }
  return m;
}

RadonMeasure restrict(const RadonMeasure& mu, const Region& region) {
  if (region.center.dim() != mu.dimension()) throw InvalidArgument("region dimension mismatch");
  std::vector<Atom> atoms;
  for (const Atom& a : mu.atoms())
    if (region.contains(a.location)) atoms.push_back(a);
  std::optional<DensityGrid> dens;
  if (const auto& d = mu.density()) {
    dens = DensityGrid{d->grid, std::vector<double>(d->values.size(), 0.0)};
    for (std::size_t f = 0; f < d->values.size(); ++f)
      if (region.contains(d->grid.center(f))) dens->values[f] = d->values[f];
  }
  return RadonMeasure(mu.dimension(), std::move(atoms), std::move(dens));
}

double ball_mass(const RadonMeasure& mu, const Vec& x, double r, const OverlapOptions& opts) {
  const int n = mu.dimension();
  if (x.dim() != n) throw InvalidArgument("ball center dimension mismatch");
  if (r < 0.0) throw InvalidArgument("ball radius must be nonnegative");
  const double r2 = r * r;
  double mass = 0.0;
  for (const Atom& a : mu.atoms())
    if (norm2(a.location - x) <= r2) mass += a.weight;

  const auto& d = mu.density();
  if (!d || r == 0.0) return mass;
  const GridSpec& g = d->grid;
  const double h = g.h();
  const Vec rvec = Vec::filled(n, r);
  const auto [lo, hi] = g.cell_range(x - rvec, x + rvec);
  const double ball_volume = unit_ball_volume(n) * std::pow(r, n);
  const double cell_volume = g.cell_volume();
  const std::vector<Vec>* pattern = nullptr;

  GridSpec::for_each_in(n, lo, hi, [&](const CellIndex& idx) {
    const double rho = d->values[g.flatten(idx)];
    if (rho == 0.0) return;
    const Vec cl = g.lower(idx);
    double near2 = 0.0, far2 = 0.0;
    bool ball_inside = true;
    for (int i = 0; i < n; ++i) {
      const double a = cl[i] - x[i], b = cl[i] + h - x[i];
      if (a > 0.0) near2 += a * a;
      if (b < 0.0) near2 += b * b;
      far2 += std::max(a * a, b * b);
      if (x[i] - r < cl[i] || x[i] + r > cl[i] + h) ball_inside = false;
    }
    if (near2 > r2) return;
    if (far2 <= r2) {
      mass += rho * cell_volume;
      return;
    }
    if (ball_inside) {
      mass += rho * ball_volume;
      return;
    }
    if (!pattern) pattern = &overlap_pattern(n, opts.samples, opts.seed);
    std::size_t hits = 0;
    for (const Vec& p : *pattern) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double y = cl[i] + h * p[i] - x[i];
        s += y * y;
      }
      if (s <= r2) ++hits;
    }
    mass += rho * cell_volume * static_cast<double>(hits) / static_cast<double>(pattern->size());
  });
  return mass;
}

std::optional<BoundingBox> support_box(const RadonMeasure& mu) {
  const int n = mu.dimension();
  std::optional<BoundingBox> box;
  auto grow = [&](const Vec& lo, const Vec& hi) {
    if (!box) {
      box = BoundingBox{lo, hi};
      return;
    }
    for (int i = 0; i < n; ++i) {
      box->lo[i] = std::min(box->lo[i], lo[i]);
      box->hi[i] = std::max(box->hi[i], hi[i]);
    }
  };
  for (const Atom& a : mu.atoms())
    if (a.weight != 0.0) grow(a.location, a.location);
  if (const auto& d = mu.density()) {
    const Vec side = Vec::filled(n, d->grid.h());
    for (std::size_t f = 0; f < d->values.size(); ++f) {
      if (d->values[f] == 0.0) continue;
      const Vec lo = d->grid.lower(d->grid.unflatten(f));
      grow(lo, lo + side);
    }
  }
  return box;
}

DensityValue density_at(const RadonMeasure& mu, const Vec& a, std::span<const double> radii, double rel_tolerance,
                        const OverlapOptions& opts) {
  if (radii.empty()) throw InvalidArgument("density_at needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw InvalidArgument("density_at radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw InvalidArgument("density_at radii must decrease");
  }
  if (const auto h = mu.mesh(); h && radii.back() < *h / 4.0 * (1.0 - 1e-12))
    throw InvalidArgument("density_at radii must stay >= h/4 on a density grid");

  const int n = mu.dimension();
  DensityValue out{a, std::nullopt, {radii.begin(), radii.end()}, {}};
  out.averages.reserve(radii.size());
  for (double r : radii) out.averages.push_back(ball_mass(mu, a, r, opts) / (unit_ball_volume(n) * std::pow(r, n)));
  if (out.averages.size() < 3) return out;
  const std::size_t m = out.averages.size();
  double scale = 0.0, spread = 0.0;
  for (std::size_t i = m - 3; i < m; ++i) {
    scale = std::max(scale, std::abs(out.averages[i]));
    for (std::size_t j = i + 1; j < m; ++j) spread = std::max(spread, std::abs(out.averages[i] - out.averages[j]));
  }
  if (spread <= rel_tolerance * scale) out.value = out.averages.back();
  return out;
}

double mollifier_constant(int dim) { return (dim + 2.0) * (dim + 4.0) / (8.0 * unit_ball_volume(dim)); }

double mollifier(const Vec& z) {
  const double s = norm2(z);
  if (s >= 1.0) return 0.0;
  const double t = 1.0 - s;
  return mollifier_constant(z.dim()) * t * t;
}

RadonMeasure mollify(const RadonMeasure& mu, double r, std::optional<double> h_out) {
  if (!(r > 0.0)) throw InvalidArgument("mollification radius must be positive");
  const double h = h_out.value_or(r / 8.0);
  if (!(h > 0.0) || h > r / 4.0 * (1.0 + 1e-12)) throw InvalidArgument("mollify output mesh must satisfy 0 < h <= r/4");
  const int n = mu.dimension();
  const auto box = support_box(mu);
  if (!box) {
    GridSpec g(Vec(n), h, std::vector<int>(n, 1));
    return RadonMeasure(n, {}, DensityGrid{g, {0.0}});
  }
  const Vec pad = Vec::filled(n, r + h);
  const GridSpec g = covering_grid(box->lo - pad, box->hi + pad, h);
  std::vector<double> values(g.cell_count(), 0.0);

  std::vector<Atom> sources = mu.atoms();
  if (const auto& d = mu.density())
    for (std::size_t f = 0; f < d->values.size(); ++f)
      if (d->values[f] != 0.0) sources.push_back({d->grid.center(f), d->values[f] * d->grid.cell_volume()});

  const double scale = std::pow(r, -n);
  const double vol = g.cell_volume();
  const Vec side = Vec::filled(n, h);
  for (const Atom& s : sources) {
    const Vec rv = Vec::filled(n, r);
    const auto [lo, hi] = g.cell_range(s.location - rv, s.location + rv);
    GridSpec::for_each_in(n, lo, hi, [&](const CellIndex& idx) {
      const Vec cl = g.lower(idx);
      double near2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double a = cl[i] - s.location[i], b = cl[i] + h - s.location[i];
        if (a > 0.0) near2 += a * a;
        if (b < 0.0) near2 += b * b;
      }
      if (near2 >= r * r) return;
      const double integral = integrate_box(
          [&](const Vec& y) { return mollifier((y - s.location) * (1.0 / r)) * scale; }, cl, cl + side, 4, 0.0);
      values[g.flatten(idx)] += s.weight * integral / vol;
    });
  }
  return RadonMeasure(n, {}, DensityGrid{g, std::move(values)});
}

RadonMeasure sphere_atoms(int dim, const Vec& center, double radius, std::size_t count, double mass) {
  if (center.dim() != dim) throw InvalidArgument("sphere center dimension mismatch");
  if (!(radius > 0.0) || count == 0) throw InvalidArgument("sphere_atoms needs positive radius and count");
  std::vector<Atom> atoms;
  atoms.reserve(count);
  const double w = mass / static_cast<double>(count);
  if (dim == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      atoms.push_back({center + Vec{std::cos(th), std::sin(th)} * radius, w});
    }
  } else if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(i);
      atoms.push_back({center + Vec{s * std::cos(phi), s * std::sin(phi), z} * radius, w});
    }
  } else {
    throw Unsupported("sphere_atoms supports N = 2 and N = 3");
  }
  return RadonMeasure(dim, std::move(atoms));
}

}  // namespace potlab
