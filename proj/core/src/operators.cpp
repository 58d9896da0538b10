#include "potlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "potlab/errors.hpp"
#include "potlab/parallel.hpp"
#include "potlab/quadrature.hpp"

namespace potlab {
namespace {

void require_same_dim(const Kernel& k, const RadonMeasure& mu) {
  if (k.dimension() != mu.dimension()) throw InvalidArgument("kernel and measure dimensions differ");
}

void require_points(int dim, std::span<const Vec> points) {
  for (const Vec& p : points)
    if (p.dim() != dim) throw InvalidArgument("evaluation point dimension mismatch");
}

struct Contribution {
  double distance;
  Vec gradient;
};

std::vector<Contribution> singular_contributions(const Kernel& k, const RadonMeasure& mu, const Vec& x) {
  std::vector<Contribution> out;
  for (const Atom& a : mu.atoms()) {
    const Vec z = x - a.location;
    const double d = norm(z);
    if (d == 0.0 || a.weight == 0.0) continue;
    out.push_back({d, k.gradient_unchecked(z) * a.weight});
  }
  if (const auto& dens = mu.density()) {
    const double vol = dens->grid.cell_volume();
    for (std::size_t f = 0; f < dens->values.size(); ++f) {
      if (dens->values[f] == 0.0) continue;
      const Vec z = x - dens->grid.center(f);
      const double d = norm(z);
      if (d == 0.0) continue;
      out.push_back({d, k.gradient_unchecked(z) * (dens->values[f] * vol)});
    }
  }
  return out;
}

double max_pairwise_last3(const std::vector<Vec>& v) {
  const std::size_t m = v.size();
  double osc = 0.0;
  for (std::size_t i = m - 3; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) osc = std::max(osc, distance(v[i], v[j]));
  return osc;
}

}  // namespace

double cell_integral(const Kernel& k, const Vec& x, const Vec& lo, double h, int order) {
  const Vec hi = lo + Vec::filled(lo.dim(), h);
  auto f = [&](const Vec& y) {
    const Vec z = x - y;
    return norm2(z) == 0.0 ? 0.0 : k.value_unchecked(z);
  };
  // The split at the projection of x also resolves the near-singular case just outside the cell.
  return integrate_box_singular(f, lo, hi, x, order, 0.0);
}

double potential_at(const Kernel& k, const RadonMeasure& mu, const Vec& x) {
  double u = 0.0;
  for (const Atom& a : mu.atoms()) {
    const Vec z = x - a.location;
    if (norm(z) < kAtomExclusion) {
      if (a.weight != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    u += a.weight * k.value_unchecked(z);
  }
  if (const auto& dens = mu.density()) {
    const GridSpec& g = dens->grid;
    const int n = g.dim();
    const Vec reach = Vec::filled(n, g.h());
    const auto [near_lo, near_hi] = g.cell_range(x - reach, x + reach);
    CellIndex all_lo{}, all_hi{};
    for (int i = 0; i < n; ++i) all_hi[i] = g.extent(i);
    double far = 0.0, near = 0.0;
    std::size_t f = 0;
    GridSpec::for_each_in(n, all_lo, all_hi, [&](const CellIndex& idx) {
      const double rho = dens->values[f++];
      if (rho == 0.0) return;
      bool is_near = true;
      for (int i = 0; i < n && is_near; ++i) is_near = idx[i] >= near_lo[i] && idx[i] < near_hi[i];
      if (is_near)
        near += rho * cell_integral(k, x, g.lower(idx), g.h());
      else
        far += rho * k.value_unchecked(x - g.center(idx));
    });
    u += far * g.cell_volume() + near;
  }
  return u;
}

FieldSample potential(const Kernel& k, const RadonMeasure& mu, std::span<const Vec> points) {
  require_same_dim(k, mu);
  require_points(mu.dimension(), points);
  FieldSample out = FieldSample::zeros(FieldKind::potential, {points.begin(), points.end()}, 1);
  parallel_for(points.size(), [&](std::size_t i) { out.values[i] = potential_at(k, mu, points[i]); });
  return out;
}

FieldSample gradient_direct(const Kernel& k, const RadonMeasure& mu, std::span<const Vec> points) {
  require_same_dim(k, mu);
  require_points(mu.dimension(), points);
  const int n = mu.dimension();
  FieldSample out = FieldSample::zeros(FieldKind::gradient, {points.begin(), points.end()}, n);
  parallel_for(points.size(), [&](std::size_t p) {
    const Vec& x = points[p];
    Vec g(n);
    for (const Atom& a : mu.atoms()) {
      const Vec z = x - a.location;
      if (norm(z) < kAtomExclusion) continue;
      g += k.gradient_unchecked(z) * a.weight;
    }
    if (const auto& dens = mu.density()) {
      const auto self = dens->grid.locate(x);
      Vec s(n);
      for (std::size_t f = 0; f < dens->values.size(); ++f) {
        if (dens->values[f] == 0.0 || (self && *self == f)) continue;
        s += k.gradient_unchecked(x - dens->grid.center(f)) * dens->values[f];
      }
      g += s * dens->grid.cell_volume();
    }
    for (int c = 0; c < n; ++c) out.values[p * n + c] = g[c];
  });
  return out;
}

FieldSample maximal_function(const RadonMeasure& mu, std::span<const Vec> points, std::span<const double> radii,
                             const OverlapOptions& opts) {
  if (radii.empty()) throw InvalidArgument("maximal_function needs a nonempty radius list");
  for (double r : radii)
    if (!(r > 0.0)) throw InvalidArgument("maximal_function radii must be positive");
  require_points(mu.dimension(), points);
  const int n = mu.dimension();
  FieldSample out = FieldSample::zeros(FieldKind::maximal, {points.begin(), points.end()}, 1);
  out.lower_bound = true;
  parallel_for(points.size(), [&](std::size_t i) {
    double best = 0.0;
    for (double r : radii)
      best = std::max(best, std::abs(ball_mass(mu, points[i], r, opts)) / (unit_ball_volume(n) * std::pow(r, n)));
    out.values[i] = best;
  });
  return out;
}

Vec truncated_singular(const Kernel& k, const RadonMeasure& mu, const Vec& x, double eps) {
  require_same_dim(k, mu);
  if (!(eps > 0.0)) throw InvalidArgument("truncation radius must be positive");
  Vec t(mu.dimension());
  for (const Contribution& c : singular_contributions(k, mu, x))
    if (c.distance > eps) t += c.gradient;
  return t;
}

std::vector<Vec> truncated_singular_along(const Kernel& k, const RadonMeasure& mu, const Vec& x,
                                          const EpsilonSchedule& schedule) {
  require_same_dim(k, mu);
  auto contrib = singular_contributions(k, mu, x);
  std::sort(contrib.begin(), contrib.end(),
            [](const Contribution& a, const Contribution& b) { return a.distance > b.distance; });
  std::vector<Vec> out;
  out.reserve(schedule.size());
  Vec acc(mu.dimension());
  std::size_t next = 0;
  for (double eps : schedule.entries()) {
    while (next < contrib.size() && contrib[next].distance > eps) acc += contrib[next++].gradient;
    out.push_back(acc);
  }
  return out;
}

FieldSample maximal_singular(const Kernel& k, const RadonMeasure& mu, std::span<const Vec> points,
                             const EpsilonSchedule& schedule) {
  require_same_dim(k, mu);
  require_points(mu.dimension(), points);
  FieldSample out = FieldSample::zeros(FieldKind::maximal_singular, {points.begin(), points.end()}, 1);
  out.lower_bound = true;
  parallel_for(points.size(), [&](std::size_t i) {
    double best = 0.0;
    for (const Vec& t : truncated_singular_along(k, mu, points[i], schedule)) best = std::max(best, norm(t));
    out.values[i] = best;
  });
  return out;
}

GradientEstimate gradient_potential(const Kernel& k, const RadonMeasure& mu, const Vec& a,
                                    const EpsilonSchedule& schedule, const GradientOptions& opts) {
  require_same_dim(k, mu);
  if (a.dim() != mu.dimension()) throw InvalidArgument("evaluation point dimension mismatch");
  const int n = mu.dimension();
  GradientEstimate out;
  out.truncated = truncated_singular_along(k, mu, a, schedule);
  out.oscillation = max_pairwise_last3(out.truncated);
  const Vec& last = out.truncated.back();
  if (out.oscillation <= opts.tolerance * std::max(1.0, norm(last))) out.principal_part = last;

  if (k.parity() == Parity::even) {
    out.flux_limit = Vec(n);
  } else {
    const auto pv = pv_vector_along(k, schedule.entries(), opts.flux_tolerance, opts.flux_nodes);
    if (pv.converged) out.flux_limit = pv.limit;
  }

  const bool flux_zero = out.flux_limit && max_abs(*out.flux_limit) == 0.0;
  if (flux_zero) {
    out.density = 0.0;
  } else {
    std::vector<double> radii;
    const double floor = mu.mesh() ? *mu.mesh() / 4.0 : 0.0;
    for (double e : schedule.entries())
      if (e >= floor) radii.push_back(e);
    if (!radii.empty()) out.density = density_at(mu, a, radii, opts.density_tolerance, opts.overlap).value;
  }

  if (!out.principal_part) {
    out.status = "principal value";
  } else if (!out.flux_limit) {
    out.status = "flux";
  } else if (!out.density) {
    out.status = "density";
  } else {
    out.status = "defined";
    out.value = *out.principal_part + *out.flux_limit * (flux_zero ? 0.0 : *out.density);
  }
  return out;
}

}  // namespace potlab
