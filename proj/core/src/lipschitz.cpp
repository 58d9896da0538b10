#include "potlab/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "potlab/errors.hpp"
#include "potlab/operators.hpp"
#include "potlab/parallel.hpp"

namespace potlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool on_atom(const RadonMeasure& mu, const Vec& x) {
  for (const Atom& a : mu.atoms())
    if (distance(a.location, x) <= kAtomExclusion) return true;
  return false;
}

double dominating_at(const Kernel& k, const RadonMeasure& mu, const Vec& x, const DominatingOptions& opts) {
  if (on_atom(mu, x)) return kInf;
  const int n = mu.dimension();
  std::vector<double> radii = opts.radii;
  std::vector<double> eps = opts.schedule.entries();
  for (const Atom& a : mu.atoms()) {
    const double d = distance(a.location, x);
    radii.push_back(d * (1.0 + 1e-12));
    eps.push_back(d);
  }
  double m = 0.0;
  for (double r : radii) m = std::max(m, std::abs(ball_mass(mu, x, r, opts.overlap)) / (unit_ball_volume(n) * std::pow(r, n)));
  std::sort(eps.begin(), eps.end(), std::greater<>());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  double t = 0.0;
  for (const Vec& v : truncated_singular_along(k, mu, x, EpsilonSchedule(eps))) t = std::max(t, norm(v));
  return m + t;
}

struct PairValue {
  double ratio = 0.0;
  bool zero_denominator = false;
};

PairValue pair_value(const Kernel& k, const RadonMeasure& mu, const Vec& x, const Vec& y,
                     const DominatingOptions& opts) {
  if (on_atom(mu, x) || on_atom(mu, y)) return {kInf, false};
  const double num = std::abs(potential_at(k, mu, x) - potential_at(k, mu, y));
  const double den = distance(x, y) * (dominating_at(k, mu, x, opts) + dominating_at(k, mu, y, opts));
  if (den == 0.0) return {num == 0.0 ? 0.0 : kInf, true};
  return {num / den, false};
}

}  // namespace

std::vector<double> DominatingOptions::default_radii() {
  std::vector<double> r;
  for (int e = 3; e >= -12; --e) r.push_back(std::ldexp(1.0, e));
  return r;
}

FieldSample dominating_function(const Kernel& k, const RadonMeasure& mu, std::span<const Vec> points,
                                const DominatingOptions& opts) {
  if (k.dimension() != mu.dimension()) throw InvalidArgument("kernel and measure dimensions differ");
  for (const Vec& p : points)
    if (p.dim() != mu.dimension()) throw InvalidArgument("evaluation point dimension mismatch");
  if (opts.radii.empty()) throw InvalidArgument("dominating_function needs a nonempty radius list");
  FieldSample out = FieldSample::zeros(FieldKind::dominating, {points.begin(), points.end()}, 1);
  out.lower_bound = mu.has_density();
  parallel_for(points.size(), [&](std::size_t i) { out.values[i] = dominating_at(k, mu, points[i], opts); });
  return out;
}

WeakL1Report weak_l1_norm(const FieldSample& field, std::span<const double> t_samples, std::size_t min_cells) {
  if (!field.grid) throw InvalidArgument("weak_l1_norm needs a field sampled on a grid");
  if (field.components != 1) throw InvalidArgument("weak_l1_norm needs a scalar field");
  const double vol = field.grid->cell_volume();
  std::vector<double> vals = field.values;
  std::sort(vals.begin(), vals.end());
  WeakL1Report rep;
  for (double t : t_samples) {
    WeakL1Level lv;
    lv.t = t;
    lv.cells = static_cast<std::size_t>(vals.end() - std::upper_bound(vals.begin(), vals.end(), t));
    lv.measure = lv.cells * vol;
    lv.t_times_measure = t * lv.measure;
    if (lv.cells >= min_cells && lv.t_times_measure > rep.sup) {
      rep.sup = lv.t_times_measure;
      rep.argsup_t = t;
    }
    rep.levels.push_back(lv);
  }
  return rep;
}

std::vector<double> geometric_t_samples(double lo, double hi, int per_octave) {
  if (!(lo > 0.0) || !(hi >= lo) || per_octave < 1) throw InvalidArgument("invalid geometric t range");
  std::vector<double> out;
  for (int j = 0;; ++j) {
    const double t = lo * std::exp2(double(j) / per_octave);
    out.push_back(t);
    if (t >= hi) break;
  }
  return out;
}

const char* to_string(PairSampler s) {
  switch (s) {
    case PairSampler::uniform: return "uniform";
    case PairSampler::near_support: return "near_support";
  }
  return "unknown";
}

double lipschitz_ratio(const Kernel& k, const RadonMeasure& mu, const Vec& x, const Vec& y,
                       const DominatingOptions& opts) {
  return pair_value(k, mu, x, y, opts).ratio;
}

LipschitzReport lipschitz_check(const Kernel& k, const RadonMeasure& mu, std::size_t pair_count,
                                const BoundingBox& window, std::uint64_t seed, const LipschitzOptions& opts) {
  const int n = mu.dimension();
  if (k.dimension() != n || window.lo.dim() != n || window.hi.dim() != n)
    throw InvalidArgument("kernel, measure and window dimensions differ");
  if (pair_count == 0) throw InvalidArgument("pair_count must be at least 1");
  for (int i = 0; i < n; ++i)
    if (!(window.hi[i] > window.lo[i])) throw InvalidArgument("window must have positive extent");
  if (const auto box = support_box(mu)) {
    for (int i = 0; i < n; ++i)
      if (box->lo[i] < window.lo[i] || box->hi[i] > window.hi[i])
        throw InvalidArgument("window must contain the support of mu");
  }
  if (opts.grid_cells < 2) throw InvalidArgument("grid_cells must be at least 2");

  std::vector<Vec> anchors;
  for (const Atom& a : mu.atoms()) anchors.push_back(a.location);
  if (const auto& d = mu.density())
    for (std::size_t f = 0; f < d->grid.cell_count(); ++f)
      if (d->values[f] != 0.0) anchors.push_back(d->grid.center(f));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&]() {
    Vec p(n);
    if (opts.sampler == PairSampler::near_support && !anchors.empty()) {
      const std::size_t j = std::min(anchors.size() - 1, static_cast<std::size_t>(unit(rng) * anchors.size()));
      for (int i = 0; i < n; ++i) p[i] = anchors[j][i] + opts.near_scale * gauss(rng);
    } else {
      for (int i = 0; i < n; ++i) p[i] = window.lo[i] + (window.hi[i] - window.lo[i]) * unit(rng);
    }
    return p;
  };
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.reserve(pair_count);
  for (std::size_t i = 0; i < pair_count; ++i) {
    Vec x = draw();
    Vec y = draw();
    pairs.emplace_back(std::move(x), std::move(y));
  }

  std::vector<PairValue> values(pair_count);
  parallel_for(pair_count, [&](std::size_t i) {
    values[i] = pair_value(k, mu, pairs[i].first, pairs[i].second, opts.dominating);
  });

  LipschitzReport rep;
  rep.pairs_requested = pair_count;
  rep.seed = seed;
  rep.sampler = to_string(opts.sampler);
  for (std::size_t i = 0; i < pair_count; ++i) {
    const auto& [x, y] = pairs[i];
    if (on_atom(mu, x) || on_atom(mu, y)) {
      ++rep.excluded_pairs;
      continue;
    }
    ++rep.pairs_tested;
    if (values[i].zero_denominator) ++rep.zero_denominator_pairs;
    if (values[i].ratio > rep.worst_ratio || rep.pairs_tested == 1) {
      rep.worst_ratio = values[i].ratio;
      rep.worst_pair = {x, y, values[i].ratio};
    }
  }
  if (rep.pairs_tested == 0) throw InvalidArgument("every sampled pair was excluded");
  rep.empirical_C = rep.worst_ratio;

  auto weak_on = [&](int cells) {
    double h = 0.0;
    for (int i = 0; i < n; ++i) h = std::max(h, (window.hi[i] - window.lo[i]) / cells);
    std::vector<int> shape(n);
    for (int i = 0; i < n; ++i) shape[i] = std::max(1, static_cast<int>(std::ceil((window.hi[i] - window.lo[i]) / h - 1e-9)));
    const GridSpec grid(window.lo, h, shape);
    FieldSample f = dominating_function(k, mu, grid.centers(), opts.dominating);
    f.grid = grid;
    double lo = kInf, hi = 0.0;
    for (double v : f.values)
      if (v > 0.0 && std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (!(hi > 0.0)) return 0.0;
    const std::size_t scaled_min = opts.min_cells * static_cast<std::size_t>(std::pow(double(cells) / opts.grid_cells, n));
    return weak_l1_norm(f, geometric_t_samples(lo * 0.5, hi), std::max<std::size_t>(1, scaled_min)).sup;
  };
  rep.weak_l1_of_I = weak_on(opts.grid_cells);
  rep.weak_l1_fine = weak_on(2 * opts.grid_cells);
  rep.refinement_drift =
      rep.weak_l1_fine > 0.0 ? std::abs(rep.weak_l1_fine - rep.weak_l1_of_I) / rep.weak_l1_fine : 0.0;
  return rep;
}

}  // namespace potlab
