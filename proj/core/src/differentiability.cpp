#include "potlab/differentiability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "potlab/errors.hpp"

namespace potlab {
namespace {

struct Window {
  GridSpec grid;
  std::vector<CellIndex> cells;
  CellIndex center_cell{};
};

/// Lattice with a at the center of cell (m, ..., m); cells with center in B(a, r).
Window make_window(const Vec& a, double r, double h, bool with_center) {
  const int n = a.dim();
  const int m = static_cast<int>(std::ceil(r / h - 1e-9));
  Window w;
  w.grid = GridSpec(a - Vec::filled(n, (m + 0.5) * h), h, std::vector<int>(n, 2 * m + 1));
  CellIndex lo{}, hi{};
  for (int i = 0; i < n; ++i) {
    hi[i] = 2 * m + 1;
    w.center_cell[i] = m;
  }
  const double limit = (r / h) * (r / h) * (1.0 + 1e-12);
  GridSpec::for_each_in(n, lo, hi, [&](const CellIndex& idx) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += double(idx[i] - m) * (idx[i] - m);
    if (s > limit) return;
    if (!with_center && idx == w.center_cell) return;
    w.cells.push_back(idx);
  });
  return w;
}

void check_window_args(const RadonMeasure& mu, const Vec& a, const Vec& v, double r, double h) {
  if (a.dim() != mu.dimension() || v.dim() != mu.dimension())
    throw InvalidArgument("center and gradient must match the measure dimension");
  if (!(r > 0.0) || !(h > 0.0)) throw InvalidArgument("window radius and mesh must be positive");
  if (h > r / 8.0 * (1.0 + 1e-12)) throw InvalidArgument("window mesh must satisfy h <= r/8");
  for (const Atom& at : mu.atoms())
    if (distance(at.location, a) <= kAtomExclusion)
      throw InvalidArgument("center coincides with an atom: u(a) is undefined");
}

std::vector<double> remainder_values(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v,
                                     const Window& w, bool cell_averaged = false) {
  std::vector<Vec> pts;
  pts.reserve(w.cells.size());
  for (const CellIndex& c : w.cells) pts.push_back(w.grid.center(c));
  const double ua = potential_at(k, mu, a);
  if (!std::isfinite(ua)) throw InvalidArgument("u(a) is not finite");
  std::vector<double> u;
  if (!cell_averaged) {
    u = potential(k, mu, pts).values;
  } else {
    const double h = w.grid.h();
    const double vol = std::pow(h, a.dim());
    u = mu.has_density() ? potential(k, RadonMeasure(mu.dimension(), {}, mu.density()), pts).values
                         : std::vector<double>(pts.size(), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec lo = w.grid.lower(w.cells[i]);
      for (const Atom& at : mu.atoms()) {
        const Vec d = pts[i] - at.location;
        if (max_abs(d) < 1.5 * h)
          u[i] += at.weight * cell_integral(k, at.location, lo, h) / vol;
        else
          u[i] += at.weight * k.value_unchecked(d);
      }
    }
  }
  std::vector<double> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec d = pts[i] - a;
    out[i] = std::abs(u[i] - ua - dot(v, d)) / norm(d);
  }
  return out;
}

void check_radii(std::span<const double> radii) {
  if (radii.empty()) throw InvalidArgument("radius list is empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw InvalidArgument("radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw InvalidArgument("radii must be strictly decreasing");
  }
}

void check_options(const DiffOptions& opts) {
  if (opts.mesh_ratio < 8) throw InvalidArgument("mesh_ratio must be at least 8");
  if (opts.t_min_exponent > opts.t_max_exponent) throw InvalidArgument("empty t exponent range");
}

}  // namespace

FieldSample remainder_field(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v, double r,
                            double h) {
  check_window_args(mu, a, v, r, h);
  const Window w = make_window(a, r, h, false);
  std::vector<Vec> pts;
  pts.reserve(w.cells.size());
  for (const CellIndex& c : w.cells) pts.push_back(w.grid.center(c));
  FieldSample out = FieldSample::zeros(FieldKind::remainder, std::move(pts), 1);
  out.values = remainder_values(k, mu, a, v, w);
  out.grid = w.grid;
  return out;
}

std::vector<double> default_t_samples(const FieldSample& remainder, const DiffOptions& opts) {
  std::vector<double> vals;
  for (double x : remainder.values)
    if (std::isfinite(x)) vals.push_back(x);
  if (vals.empty()) return {};
  auto mid = vals.begin() + vals.size() / 2;
  std::nth_element(vals.begin(), mid, vals.end());
  const double median = *mid;
  if (!(median > 0.0)) return {};
  std::vector<double> out;
  for (int e = opts.t_min_exponent; e <= opts.t_max_exponent; ++e) out.push_back(std::ldexp(median, e));
  return out;
}

std::string diff_verdict(std::span<const double> indices) {
  const std::size_t m = indices.size();
  if (m < 3) return "inconclusive";
  const double early = indices[m - 3], last = indices[m - 1];
  if (!std::isfinite(early) || !std::isfinite(last)) return "inconclusive";
  return last <= 0.5 * early ? "differentiable-trend" : "inconclusive";
}

DiffReport capacity_diff_index(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v,
                               std::span<const double> radii, const std::optional<std::vector<double>>& t_samples,
                               const DiffOptions& opts) {
  check_radii(radii);
  check_options(opts);
  const int n = mu.dimension();
  DiffReport rep;
  rep.center = a;
  rep.gradient = v;
  rep.radii.assign(radii.begin(), radii.end());
  rep.mesh_ratio = opts.mesh_ratio;

  // Every radius uses the same index lattice; capacities are solved once at h = 1 and rescaled.
  const double ratio = opts.mesh_ratio;
  const Window unit_ball = make_window(Vec::zero(n), ratio, 1.0, true);
  const Window unit_window = make_window(Vec::zero(n), ratio, 1.0, false);
  const double ball_unit = capacity_lp(DiscreteSet(Vec::zero(n), 1.0, unit_ball.cells), opts.capacity).value;
  const double window_unit = capacity_lp(DiscreteSet(Vec::zero(n), 1.0, unit_window.cells), opts.capacity).value;
  std::map<std::vector<CellIndex>, double> solved;

  for (double r : radii) {
    const double h = r / ratio;
    check_window_args(mu, a, v, r, h);
    const Window w = make_window(a, r, h, false);
    const std::vector<double> rem = remainder_values(k, mu, a, v, w, opts.cell_averaged);

    DiffRadius dr;
    dr.r = r;
    dr.h = h;
    const double scale = std::pow(h, n - 1);
    dr.ball_capacity = ball_unit * scale;
    dr.window_capacity = window_unit * scale;

    std::vector<double> ts;
    if (t_samples) {
      ts = *t_samples;
    } else {
      FieldSample tmp = FieldSample::zeros(FieldKind::remainder, {}, 1);
      tmp.values = rem;
      ts = default_t_samples(tmp, opts);
    }
    std::sort(ts.begin(), ts.end(), std::greater<>());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    double sup = 0.0;
    for (double t : ts) {
      if (!(t > 0.0)) continue;
      DiffLevel lv;
      lv.t = t;
      std::vector<CellIndex> cells;
      for (std::size_t i = 0; i < rem.size(); ++i)
        if (rem[i] > t) cells.push_back(w.cells[i]);
      lv.cells = cells.size();
      lv.measure = cells.size() * std::pow(h, n);
      if (cells.empty()) {
        lv.capacity = 0.0;
      } else if (opts.prune && t * opts.prune_margin * dr.window_capacity <= sup) {
        lv.capacity = std::nullopt;
      } else {
        std::sort(cells.begin(), cells.end());
        auto it = solved.find(cells);
        if (it == solved.end()) {
          const double val = capacity_lp(DiscreteSet(Vec::zero(n), 1.0, cells), opts.capacity).value;
          it = solved.emplace(std::move(cells), val).first;
          ++rep.lp_solves;
        }
        lv.capacity = it->second * scale;
      }
      lv.t_times_capacity = t * lv.capacity.value_or(0.0);
      if (lv.t_times_capacity > sup) {
        sup = lv.t_times_capacity;
        dr.argsup_t = t;
      }
      dr.levels.push_back(lv);
    }
    dr.index = sup / dr.ball_capacity;
    rep.per_radius_index.push_back(dr.index);
    rep.details.push_back(std::move(dr));
  }
  rep.verdict = diff_verdict(rep.per_radius_index);
  return rep;
}

std::optional<double> s_functional(const Kernel& k, const RadonMeasure& mu, const Vec& a,
                                   std::span<const double> radii, const std::optional<std::vector<double>>& t_samples,
                                   const DiffOptions& opts) {
  const GradientEstimate g = gradient_potential(k, mu, a, opts.schedule, opts.gradient);
  if (!g.value) return std::nullopt;
  const DiffReport rep = capacity_diff_index(k, mu, a, *g.value, radii, t_samples, opts);
  return *std::max_element(rep.per_radius_index.begin(), rep.per_radius_index.end());
}

std::vector<double> lp_diff_index(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v, double p,
                                  std::span<const double> radii, const DiffOptions& opts) {
  check_radii(radii);
  check_options(opts);
  const int n = mu.dimension();
  if (!(p >= 1.0) || !(p < double(n) / (n - 1))) throw InvalidArgument("p must satisfy 1 <= p < N/(N-1)");
  std::vector<double> out;
  for (double r : radii) {
    const double h = r / opts.mesh_ratio;
    check_window_args(mu, a, v, r, h);
    const std::vector<double> rem = remainder_values(k, mu, a, v, make_window(a, r, h, false), opts.cell_averaged);
    double s = 0.0;
    for (double x : rem) s += std::pow(x, p);
    out.push_back(std::pow(s / rem.size(), 1.0 / p));
  }
  return out;
}

std::vector<double> weak_lp_diff_index(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v,
                                       std::span<const double> radii,
                                       const std::optional<std::vector<double>>& t_samples, const DiffOptions& opts) {
  check_radii(radii);
  check_options(opts);
  const int n = mu.dimension();
  const double q = double(n) / (n - 1);
  std::vector<double> out;
  for (double r : radii) {
    const double h = r / opts.mesh_ratio;
    check_window_args(mu, a, v, r, h);
    const std::vector<double> rem = remainder_values(k, mu, a, v, make_window(a, r, h, false), opts.cell_averaged);
    std::vector<double> ts;
    if (t_samples) {
      ts = *t_samples;
    } else {
      FieldSample tmp = FieldSample::zeros(FieldKind::remainder, {}, 1);
      tmp.values = rem;
      ts = default_t_samples(tmp, opts);
    }
    double sup = 0.0;
    for (double t : ts) {
      if (!(t > 0.0)) continue;
      const auto count = std::count_if(rem.begin(), rem.end(), [&](double x) { return x > t; });
      sup = std::max(sup, std::pow(t, q) * count * std::pow(h, n));
    }
    out.push_back(std::pow(sup / std::pow(r, n), 1.0 / q));
  }
  return out;
}

}  // namespace potlab
