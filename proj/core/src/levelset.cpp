#include "potlab/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "potlab/errors.hpp"
#include "potlab/kernels.hpp"
#include "potlab/operators.hpp"
#include "potlab/parallel.hpp"
#include "potlab/quadrature.hpp"

namespace potlab {
namespace {

Vec gradient_kernel(const Vec& z, int n) {
  const double d2 = norm2(z);
  if (d2 == 0.0) return Vec::zero(n);
  return z * (1.0 / std::pow(d2, 0.5 * n));
}

double second_kernel(const Vec& z, int j) {
  const int n = z.dim();
  const double d2 = norm2(z);
  return (d2 - n * z[j] * z[j]) / std::pow(d2, 0.5 * (n + 2));
}

bool on_atom(const RadonMeasure& mu, const Vec& x) {
  for (const Atom& a : mu.atoms())
    if (a.weight != 0.0 && distance(a.location, x) < kAtomExclusion) return true;
  return false;
}

std::vector<double> density_radii(const RadonMeasure& mu, const EpsilonSchedule& schedule) {
  std::vector<double> radii;
  if (const auto h = mu.mesh()) {
    const double floor = *h / 4;
    for (double e : schedule.entries())
      if (e >= floor) radii.push_back(e);
    for (int k = 0; k <= 8; ++k) radii.push_back(floor * std::exp2(k / 4.0));
  } else {
    radii = schedule.entries();
  }
  std::sort(radii.begin(), radii.end(), std::greater<>());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  return radii;
}

}  // namespace

double newtonian_constant(int dim) {
  if (dim < 2) throw InvalidArgument("Newtonian potentials need N >= 2");
  return dim == 2 ? -1.0 : -(dim - 2.0);
}

FieldSample newtonian_gradient(const RadonMeasure& mu, std::span<const Vec> points) {
  const int n = mu.dimension();
  const double cn = newtonian_constant(n);
  for (const Vec& p : points) {
    if (p.dim() != n) throw InvalidArgument("evaluation point dimension mismatch");
    if (on_atom(mu, p)) throw InvalidArgument("newtonian_gradient evaluated at an atom");
  }
  FieldSample out = FieldSample::zeros(FieldKind::gradient, {points.begin(), points.end()}, n);
  parallel_for(points.size(), [&](std::size_t p) {
    const Vec& x = points[p];
    Vec g = Vec::zero(n);
    for (const Atom& a : mu.atoms()) g += gradient_kernel(x - a.location, n) * a.weight;
    if (const auto& dens = mu.density()) {
      const GridSpec& grid = dens->grid;
      const Vec reach = Vec::filled(n, grid.h());
      const auto [near_lo, near_hi] = grid.cell_range(x - reach, x + reach);
      Vec far = Vec::zero(n);
      for (std::size_t f = 0; f < grid.cell_count(); ++f) {
        const double rho = dens->values[f];
        if (rho == 0.0) continue;
        const CellIndex idx = grid.unflatten(f);
        bool near = true;
        for (int i = 0; i < n && near; ++i) near = idx[i] >= near_lo[i] && idx[i] < near_hi[i];
        if (near) {
          const Vec lo = grid.lower(idx);
          const Vec hi = lo + reach;
          g += integrate_box_singular([&](const Vec& y) { return gradient_kernel(x - y, n); }, lo, hi, x, 5,
                                      Vec::zero(n)) *
               rho;
        } else {
          far += gradient_kernel(x - grid.center(idx), n) * rho;
        }
      }
      g += far * grid.cell_volume();
    }
    g *= cn;
    for (int c = 0; c < n; ++c) out.values[p * n + c] = g[c];
  });
  return out;
}

namespace {

// Converged principal values of the second-derivative kernels for every axis.
std::vector<std::optional<double>> principal_values(const RadonMeasure& mu, const Vec& x,
                                                    const EpsilonSchedule& schedule, double tolerance) {
  const int n = mu.dimension();
  struct Term {
    double dist;
    double weight;
    Vec z;
  };
  std::vector<Term> terms;
  for (const Atom& a : mu.atoms())
    if (a.weight != 0.0) terms.push_back({distance(x, a.location), a.weight, x - a.location});
  if (const auto& dens = mu.density()) {
    const GridSpec& grid = dens->grid;
    const auto self = grid.locate(x);
    const double vol = grid.cell_volume();
    for (std::size_t f = 0; f < grid.cell_count(); ++f) {
      if (dens->values[f] == 0.0 || (self && *self == f)) continue;
      const Vec z = x - grid.center(f);
      terms.push_back({norm(z), dens->values[f] * vol, z});
    }
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.dist > b.dist; });
  const std::vector<double>& eps = schedule.entries();
  std::vector<std::vector<double>> trunc(n);
  std::vector<double> acc(n, 0.0);
  std::size_t next = 0;
  for (double e : eps) {
    for (; next < terms.size() && terms[next].dist > e; ++next)
      for (int j = 0; j < n; ++j) acc[j] += terms[next].weight * second_kernel(terms[next].z, j);
    for (int j = 0; j < n; ++j) trunc[j].push_back(acc[j]);
  }
  std::vector<std::optional<double>> out(n);
  const std::size_t m = eps.size();
  for (int j = 0; j < n; ++j) {
    const double last = trunc[j][m - 1];
    double osc = 0.0;
    for (std::size_t a = m - 3; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) osc = std::max(osc, std::abs(trunc[j][a] - trunc[j][b]));
    if (osc <= tolerance * std::max(1.0, std::abs(last))) out[j] = last;
  }
  return out;
}

DensityValue cell_density(const RadonMeasure& mu, const Vec& x, const EpsilonSchedule& schedule,
                          const SecondDerivativeOptions& opts) {
  const std::vector<double> radii = density_radii(mu, schedule);
  return density_at(mu, x, radii, opts.density_tolerance, opts.overlap);
}

}  // namespace

SecondDerivative second_derivative_pv(const RadonMeasure& mu, const Vec& x, int j, const EpsilonSchedule& schedule,
                                      const SecondDerivativeOptions& opts) {
  const int n = mu.dimension();
  if (x.dim() != n) throw InvalidArgument("evaluation point dimension mismatch");
  if (j < 0 || j >= n) throw InvalidArgument("second derivative index out of range");
  SecondDerivative out;
  if (on_atom(mu, x)) {
    out.status = "principal value";
    return out;
  }
  const std::optional<double> pv = principal_values(mu, x, schedule, opts.tolerance)[j];
  if (!pv) {
    out.status = "principal value";
    return out;
  }
  out.principal_value = pv;
  const DensityValue dv = cell_density(mu, x, schedule, opts);
  if (!dv.value) {
    out.status = "density";
    return out;
  }
  out.density = *dv.value;
  out.value = newtonian_constant(n) * (*pv + unit_ball_volume(n) * *dv.value);
  out.status = "defined";
  return out;
}

std::optional<double> laplacian_pv(const RadonMeasure& mu, const Vec& x, const EpsilonSchedule& schedule,
                                   const SecondDerivativeOptions& opts) {
  const int n = mu.dimension();
  if (x.dim() != n) throw InvalidArgument("evaluation point dimension mismatch");
  if (on_atom(mu, x)) return std::nullopt;
  double s = 0.0;
  for (const auto& pv : principal_values(mu, x, schedule, opts.tolerance)) {
    if (!pv) return std::nullopt;
    s += *pv;
  }
  const DensityValue dv = cell_density(mu, x, schedule, opts);
  if (!dv.value) return std::nullopt;
  return newtonian_constant(n) * (s + n * unit_ball_volume(n) * *dv.value);
}

double stencil_laplacian(const RadonMeasure& mu, const Vec& x, double s) {
  if (!(s > 0.0)) throw InvalidArgument("stencil step must be positive");
  const int n = mu.dimension();
  const Kernel k = make_newtonian_kernel(n);
  const double centre = potential_at(k, mu, x);
  double acc = -2.0 * n * centre;
  for (int j = 0; j < n; ++j) {
    const Vec e = Vec::unit(n, j) * s;
    acc += potential_at(k, mu, x + e) + potential_at(k, mu, x - e);
  }
  return acc / (s * s);
}

FieldSample newtonian_potential_on(const RadonMeasure& mu, const GridSpec& grid) {
  const int n = mu.dimension();
  if (grid.dim() != n) throw InvalidArgument("grid dimension mismatch");
  const Kernel k = make_newtonian_kernel(n);
  const std::vector<Vec> centers = grid.centers();
  if (!mu.has_density() || !(mu.density()->grid == grid)) {
    FieldSample P = potential(k, mu, centers);
    P.grid = grid;
    return P;
  }
  // Convolution on the density's own grid: one table entry per index offset.
  const DensityGrid& dens = *mu.density();
  FieldSample P = potential(k, RadonMeasure(n, mu.atoms()), centers);
  P.grid = grid;
  std::vector<int> tshape(n);
  for (int i = 0; i < n; ++i) tshape[i] = 2 * grid.extent(i) - 1;
  const GridSpec offsets(Vec::zero(n), 1.0, tshape);
  std::vector<double> table(offsets.cell_count());
  const GridSpec unit_cell(grid.origin(), grid.h(), std::vector<int>(n, 1));
  const RadonMeasure cell(n, {}, DensityGrid{unit_cell, {1.0}});
  const Vec c0 = grid.center(std::size_t{0});
  parallel_for(table.size(), [&](std::size_t t) {
    const CellIndex d = offsets.unflatten(t);
    Vec x = c0;
    for (int i = 0; i < n; ++i) x[i] += (d[i] - (grid.extent(i) - 1)) * grid.h();
    table[t] = potential_at(k, cell, x);
  });
  std::vector<std::size_t> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * tshape[i + 1];
  auto table_base = [&](std::size_t f, int shift) {
    const CellIndex a = grid.unflatten(f);
    std::size_t b = 0;
    for (int i = 0; i < n; ++i) b += (a[i] + shift * (grid.extent(i) - 1)) * stride[i];
    return b;
  };
  std::vector<std::pair<std::size_t, double>> sources;
  for (std::size_t f = 0; f < grid.cell_count(); ++f)
    if (dens.values[f] != 0.0) sources.emplace_back(table_base(f, 0), dens.values[f]);
  parallel_for(grid.cell_count(), [&](std::size_t f) {
    const std::size_t base = table_base(f, 1);
    double acc = 0.0;
    for (const auto& [b, rho] : sources) acc += rho * table[base - b];
    P.values[f] += acc;
  });
  return P;
}

LevelSetReport extract_level_set(const FieldSample& P, double c, double band) {
  if (!P.grid) throw InvalidArgument("extract_level_set needs a field sampled on a grid");
  if (P.components != 1 || P.values.size() != P.grid->cell_count())
    throw InvalidArgument("extract_level_set needs one scalar value per grid cell");
  if (!(band >= 0.0)) throw InvalidArgument("band must be nonnegative");
  LevelSetReport rep;
  rep.level = c;
  rep.band = band;
  rep.grid = *P.grid;
  for (std::size_t f = 0; f < P.values.size(); ++f)
    if (std::abs(P.values[f] - c) <= band) rep.cells_in_band.push_back(f);
  rep.band_volume = rep.cells_in_band.size() * rep.grid.cell_volume();
  return rep;
}

void analyze_level_set(LevelSetReport& report, const RadonMeasure& mu, const EpsilonSchedule& schedule,
                       const SecondDerivativeOptions& opts) {
  const std::size_t m = report.cells_in_band.size();
  std::vector<Vec> pts;
  pts.reserve(m);
  for (std::size_t f : report.cells_in_band) pts.push_back(report.grid.center(f));
  report.gradient_norms.assign(m, 0.0);
  report.laplacian_values.assign(m, 0.0);
  report.laplacian_from_stencil.assign(m, false);
  report.density_values.assign(m, std::nullopt);
  std::vector<char> stencil(m, 0);
  std::vector<bool> atom(m, false);
  for (std::size_t i = 0; i < m; ++i) atom[i] = on_atom(mu, pts[i]);
  parallel_for(m, [&](std::size_t i) {
    if (atom[i]) {
      report.gradient_norms[i] = std::numeric_limits<double>::infinity();
      report.laplacian_values[i] = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const FieldSample g = newtonian_gradient(mu, std::span<const Vec>(&pts[i], 1));
    report.gradient_norms[i] = norm(g.vector_at(0));
    const DensityValue dv = cell_density(mu, pts[i], schedule, opts);
    report.density_values[i] = dv.value;
    double lap = 0.0;
    bool ok = dv.value.has_value();
    for (const auto& pv : principal_values(mu, pts[i], schedule, opts.tolerance)) {
      ok = ok && pv.has_value();
      if (pv) lap += *pv;
    }
    if (ok) lap = newtonian_constant(mu.dimension()) * (lap + mu.dimension() * unit_ball_volume(mu.dimension()) * *dv.value);
    if (!ok) {
      lap = stencil_laplacian(mu, pts[i], report.grid.h() / 8);
      stencil[i] = 1;
    }
    report.laplacian_values[i] = lap;
  });
  for (std::size_t i = 0; i < m; ++i) report.laplacian_from_stencil[i] = stencil[i] != 0;
}

LevelSetDensityReport levelset_density_check(const RadonMeasure& mu, double c, std::span<const double> bands) {
  if (bands.empty()) throw InvalidArgument("band list is empty");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (!(bands[i] > 0.0)) throw InvalidArgument("bands must be positive");
    if (i > 0 && !(bands[i] < bands[i - 1])) throw InvalidArgument("bands must be strictly decreasing");
  }
  LevelSetDensityReport rep;
  rep.level = c;
  if (!mu.has_density()) {
    for (double b : bands) rep.bands.push_back({b, 0, 0.0, 0.0});
  } else {
    const DensityGrid& dens = *mu.density();
    const FieldSample P = newtonian_potential_on(mu, dens.grid);
    const double vol = dens.grid.cell_volume();
    for (double b : bands) {
      const LevelSetReport ls = extract_level_set(P, c, b);
      BandMass bm{b, ls.cells_in_band.size(), 0.0, ls.band_volume};
      for (std::size_t f : ls.cells_in_band) bm.mass += dens.values[f] * vol;
      rep.bands.push_back(bm);
    }
  }
  rep.verdict = "inconclusive";
  if (rep.bands.size() >= 3) {
    bool ok = true;
    for (std::size_t i = 1; i < rep.bands.size() && ok; ++i) {
      const double m0 = std::abs(rep.bands[i - 1].mass), m1 = std::abs(rep.bands[i].mass);
      if (m0 == 0.0) {
        ok = m1 == 0.0;
        continue;
      }
      ok = m1 * 0.9 * (rep.bands[i - 1].band / rep.bands[i].band) <= m0;
    }
    if (ok) rep.verdict = "consistent";
  }
  return rep;
}

}  // namespace potlab
