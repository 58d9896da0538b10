#include "potlab/tools/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "potlab/capacity.hpp"
#include "potlab/differentiability.hpp"
#include "potlab/errors.hpp"
#include "potlab/kernels.hpp"
#include "potlab/levelset.hpp"
#include "potlab/lipschitz.hpp"
#include "potlab/measures.hpp"
#include "potlab/operators.hpp"
#include "potlab/tools/io.hpp"

namespace potlab::suite {
namespace {

using nlohmann::json;

constexpr double kSphereRelError = 1e-3;
constexpr double kSphereSeconds = 5.0;
constexpr double kHomogeneityBand = 0.05;
constexpr double kHomogeneitySeconds = 60.0;
constexpr double kWeakCapacitarySlack = 1.10;
constexpr double kLongSeconds = 600.0;
constexpr double kMeshDrift = 0.10;
constexpr double kLipschitzSlack = 1.10;
constexpr double kWeakL1Bound = 5.2;
constexpr double kWeakL1Drift = 0.10;
constexpr double kGradientRelError = 1e-5;
constexpr double kFluxAgreement = 1e-8;
constexpr double kFluxTolerance = 1e-8;
constexpr double kDivergenceFactor = 10.0;
constexpr double kPoissonRelError = 0.02;
constexpr double kHarmonicAbsError = 1e-4;
constexpr double kBandDecay = 1.8;
constexpr double kTrendFactor = 1.8;
constexpr double kPerturbedFloor = 0.2;

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : rng_(seed * 0x9e3779b97f4a7c15ULL + stream) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Vec point(int dim, double lo, double hi) {
    Vec p(dim);
    for (int i = 0; i < dim; ++i) p[i] = uniform(lo, hi);
    return p;
  }
  Vec direction(int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(dim);
    do {
      for (int i = 0; i < dim; ++i) v[i] = g(rng_);
    } while (norm(v) < 1e-12);
    return v * (1.0 / norm(v));
  }

 private:
  std::mt19937_64 rng_;
};

RadonMeasure unit_mass_atoms(Rng& g, int dim, int max_atoms) {
  std::vector<Atom> atoms;
  const int count = g.integer(1, max_atoms);
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    atoms.push_back({g.point(dim, 0.0, 1.0), g.uniform(0.1, 1.0)});
    total += atoms.back().weight;
  }
  for (Atom& a : atoms) a.weight /= total;
  return RadonMeasure(dim, std::move(atoms));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CriterionResult newton_sphere() {
  CriterionResult r{1, "Newton sphere theorem", false, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  const RadonMeasure shell = sphere_atoms(3, Vec::zero(3), 1.0, 10000);
  Rng g(1, 0);
  std::vector<Vec> pts;
  for (int i = 0; i < 100; ++i) {
    const double rad = i % 2 ? g.uniform(0.0, 0.8) : g.uniform(1.25, 4.0);
    pts.push_back(g.direction(3) * rad);
  }
  const FieldSample P = potential(make_newtonian_kernel(3), shell, pts);
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double exact = 1.0 / std::max(norm(pts[i]), 1.0);
    worst = std::max(worst, std::abs(P.at(i) - exact) / exact);
  }
  r.seconds = seconds_since(t0);
  r.passed = worst <= kSphereRelError && r.seconds < kSphereSeconds;
  r.summary = fmt::format("max rel error {:.3e} <= {:.0e}, runtime limit {} s", worst, kSphereRelError, kSphereSeconds);
  r.details = {{"atoms", 10000}, {"points", 100}, {"max_relative_error", worst}};
  return r;
}

CriterionResult capacity_homogeneity() {
  CriterionResult r{2, "Capacity homogeneity", true, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> parts;
  for (int n : {2, 3}) {
    const auto td = std::chrono::steady_clock::now();
    const double v1 = capacity_of_ball(n, 1.0, 1.0 / 16).value;
    const double v2 = capacity_of_ball(n, 2.0, 2.0 / 16).value;
    const double q = v2 / v1 / std::pow(2.0, n - 1);
    const double secs = seconds_since(td);
    const bool ok = std::abs(q - 1.0) <= kHomogeneityBand && secs < kHomogeneitySeconds;
    r.passed = r.passed && ok;
    parts.push_back(fmt::format("N={} ratio/2^(N-1) {:.4f}", n, q));
    r.details[fmt::format("N{}", n)] = {{"value_r", v1}, {"value_2r", v2}, {"normalized_ratio", q}};
  }
  // Same absolute mesh for both radii (different lattices relative to the radius), N = 2.
  const double fixed = capacity_of_ball(2, 2.0, 1.0 / 16).value / capacity_of_ball(2, 1.0, 1.0 / 16).value / 2.0;
  r.passed = r.passed && std::abs(fixed - 1.0) <= kHomogeneityBand;
  parts.push_back(fmt::format("N=2 fixed mesh {:.4f}", fixed));
  r.details["N2_fixed_mesh_normalized_ratio"] = fixed;
  r.seconds = seconds_since(t0);
  r.summary = fmt::format("{}; band [{}, {}], runtime limit {} s per dimension", fmt::join(parts, ", "), 1.0 - kHomogeneityBand,
                          1.0 + kHomogeneityBand, kHomogeneitySeconds);
  return r;
}

CriterionResult weak_capacitary() {
  CriterionResult r{3, "Weak capacitary inequality", true, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  const GridSpec window(Vec::filled(2, -1.5), 1.0 / 16, {64, 64});
  const std::vector<double> ts{2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 32.0};
  double worst = 0.0;
  json per = json::array();
  for (int trial = 0; trial < 20; ++trial) {
    Rng g(3, trial);
    const RadonMeasure mu = unit_mass_atoms(g, 2, 5);
    const WeakNormReport rep = weak_capacity_norm(mu, window, ts);
    double m = 0.0;
    for (const auto& lv : rep.levels) m = std::max(m, lv.t_times_capacity / total_variation(mu));
    worst = std::max(worst, m);
    per.push_back(m);
  }
  r.seconds = seconds_since(t0);
  r.passed = worst <= kWeakCapacitarySlack && r.seconds < kLongSeconds;
  r.summary = fmt::format("max t Cap / |mu| {:.4f} <= {:.2f} over 20 measures x {} t, runtime limit {} s", worst,
                          kWeakCapacitarySlack, ts.size(), kLongSeconds);
  r.details = {{"max_ratio", worst}, {"per_measure", per}, {"t_samples", ts}};
  return r;
}

CriterionResult lebesgue_capacity() {
  CriterionResult r{4, "Lebesgue-capacity comparison", false, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  double coarse = 0.0, fine = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng g(4, trial);
    std::vector<io::Cube> cubes;
    for (int c = g.integer(1, 4); c > 0; --c) cubes.push_back({g.point(2, 0.0, 1.0), g.uniform(0.1, 0.3)});
    coarse = std::max(coarse, lebesgue_capacity_check(io::discretize_cubes(cubes, 1.0 / 16)).ratio);
    fine = std::max(fine, lebesgue_capacity_check(io::discretize_cubes(cubes, 1.0 / 32)).ratio);
  }
  const double drift = std::abs(fine - coarse) / fine;
  r.seconds = seconds_since(t0);
  r.passed = std::isfinite(fine) && std::isfinite(coarse) && drift <= kMeshDrift;
  r.summary = fmt::format("max ratio {:.4f} (h=1/16), {:.4f} (h=1/32), drift {:.2f}% <= {:.0f}%", coarse, fine,
                          100 * drift, 100 * kMeshDrift);
  r.details = {{"max_ratio_coarse", coarse}, {"max_ratio_fine", fine}, {"drift", drift}};
  return r;
}

CriterionResult lipschitz_estimate() {
  CriterionResult r{5, "Pointwise Lipschitz estimate", false, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  const Kernel k = make_riesz_kernel(2);
  const BoundingBox window{Vec{-0.5, -0.5}, Vec{1.5, 1.5}};
  double c = 0.0, held_out = 0.0, weak = 0.0, drift = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng g(5, trial);
    const RadonMeasure mu = unit_mass_atoms(g, 2, 6);
    const LipschitzReport rep = lipschitz_check(k, mu, 1000, window, 500 + trial);
    if (trial < 10) c = std::max(c, rep.empirical_C);
    else held_out = std::max(held_out, rep.worst_ratio);
    weak = std::max(weak, rep.weak_l1_of_I);
    drift = std::max(drift, rep.refinement_drift);
  }
  r.seconds = seconds_since(t0);
  r.passed = held_out <= kLipschitzSlack * c && weak <= kWeakL1Bound && drift <= kWeakL1Drift && r.seconds < kLongSeconds;
  r.summary = fmt::format(
      "calibrated C {:.4f}, held-out worst {:.4f} <= {:.4f}; weak-L1 of I0 {:.3f} <= {:.1f}, drift {:.2f}% <= {:.0f}%, "
      "runtime limit {} s",
      c, held_out, kLipschitzSlack * c, weak, kWeakL1Bound, 100 * drift, 100 * kWeakL1Drift, kLongSeconds);
  r.details = {{"empirical_C", c}, {"held_out_worst", held_out}, {"weak_l1_max", weak}, {"max_refinement_drift", drift}};
  return r;
}

CriterionResult gradient_formula() {
  CriterionResult r{6, "Gradient formula", true, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> parts;
  for (const char* name : {"riesz", "dipole"}) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Rng g(6, (name[0] == 'r' ? 0 : 1000) + i);
      const int n = 2 + i % 2;
      const Kernel k = make_kernel(name, n);
      std::vector<Atom> atoms;
      for (int a = g.integer(1, 6); a > 0; --a) atoms.push_back({g.point(n, 0.0, 1.0), g.uniform(-1.0, 1.0)});
      const RadonMeasure mu(n, std::move(atoms));
      const Vec x = Vec::filled(n, 0.5) + g.direction(n) * g.uniform(1.5, 3.0);
      const GradientEstimate est = gradient_potential(k, mu, x, EpsilonSchedule::dyadic());
      if (!est.value) {
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      Vec fd(n);
      const double s = 1e-4;
      for (int j = 0; j < n; ++j) {
        const Vec e = Vec::unit(n, j) * s;
        fd[j] = (potential_at(k, mu, x + e) - potential_at(k, mu, x - e)) / (2 * s);
      }
      worst = std::max(worst, distance(*est.value, fd) / norm(fd));
    }
    r.passed = r.passed && worst <= kGradientRelError;
    parts.push_back(fmt::format("{} {:.2e}", name, worst));
    r.details[name] = worst;
  }
  r.seconds = seconds_since(t0);
  r.summary = fmt::format("max rel error {} <= {:.0e} at 100 points each", fmt::join(parts, ", "), kGradientRelError);
  return r;
}

CriterionResult counterexample_kernel() {
  CriterionResult r{7, "Counterexample kernel", true, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> full, half;
  for (int j = 1; j <= 5; ++j) full.push_back(std::exp(-2 * std::numbers::pi * j));
  for (int j = 1; j <= 6; ++j) half.push_back(std::exp(-std::numbers::pi * j));
  std::vector<std::string> parts;
  for (int n : {2, 3}) {
    const Kernel k = make_oscillating_kernel(n);
    const PrincipalVector a = pv_vector_along(k, full, kFluxTolerance);
    const PrincipalVector b = pv_vector_along(k, half, kFluxTolerance);
    const bool ok_a = a.converged && a.oscillation <= kFluxAgreement;
    const bool ok_b = !b.converged && b.oscillation >= kDivergenceFactor * kFluxTolerance;
    r.passed = r.passed && ok_a && ok_b;
    parts.push_back(fmt::format("N={}: e^(-2 pi j) osc {:.2e} ({}), e^(-pi j) osc {:.2e} needs >= {:.0e} ({})", n,
                                a.oscillation, ok_a ? "ok" : "fail", b.oscillation, kDivergenceFactor * kFluxTolerance,
                                ok_b ? "ok" : "fail"));
    r.details[fmt::format("N{}", n)] = {{"full_period_oscillation", a.oscillation},
                                        {"full_period_converged", a.converged},
                                        {"half_period_oscillation", b.oscillation},
                                        {"half_period_converged", b.converged}};
  }
  r.seconds = seconds_since(t0);
  r.summary = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

CriterionResult poisson_identity() {
  CriterionResult r{8, "Poisson identity", false, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  Rng g(8, 0);
  struct Bump {
    Vec c;
    double R, w;
  };
  std::vector<Bump> bumps;
  for (int i = 0; i < 3; ++i) bumps.push_back({g.point(3, 0.35, 0.65), g.uniform(0.25, 0.35), g.uniform(0.5, 1.5)});
  const GridSpec grid(Vec::zero(3), 1.0 / 16, {16, 16, 16});
  DensityGrid d = sample_density(grid, [&](const Vec& y) {
    double v = 0.0;
    for (const Bump& b : bumps) {
      const double s = 1.0 - norm2(y - b.c) / (b.R * b.R);
      if (s > 0.0) v += b.w * s * s;
    }
    return v;
  });
  double mass = 0.0;
  for (double v : d.values) mass += v * grid.cell_volume();
  for (double& v : d.values) v /= mass;
  const RadonMeasure mu(3, {}, std::move(d));
  const EpsilonSchedule schedule = EpsilonSchedule::dyadic();
  std::vector<double> radii;
  for (int k = 8; k >= 0; --k) radii.push_back(grid.h() / 4 * std::exp2(k / 4.0));
  const double cn = newtonian_constant(3) * 3 * unit_ball_volume(3);

  // Interior: cells whose 3^3 neighbourhood carries positive density.
  std::vector<std::size_t> interior;
  for (std::size_t f = 0; f < grid.cell_count(); ++f) {
    const CellIndex idx = grid.unflatten(f);
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i) ok = idx[i] > 0 && idx[i] + 1 < grid.extent(i);
    if (!ok) continue;
    CellIndex lo{}, hi{};
    for (int i = 0; i < 3; ++i) {
      lo[i] = idx[i] - 1;
      hi[i] = idx[i] + 2;
    }
    GridSpec::for_each_in(3, lo, hi, [&](const CellIndex& k) { ok = ok && mu.density()->values[grid.flatten(k)] > 0.0; });
    if (ok) interior.push_back(f);
  }
  double worst_rel = 0.0;
  double worst_stencil = 0.0;
  bool all_defined = !interior.empty();
  for (int i = 0; i < 50 && all_defined; ++i) {
    const std::size_t f = interior[static_cast<std::size_t>(g.integer(0, static_cast<int>(interior.size()) - 1))];
    Vec x = grid.center(f);
    for (int j = 0; j < 3; ++j) x[j] += g.uniform(-0.125, 0.125) * grid.h();
    double lhs = 0.0;
    for (int j = 0; j < 3 && all_defined; ++j) {
      const SecondDerivative sd = second_derivative_pv(mu, x, j, schedule);
      if (!sd.value) all_defined = false;
      else lhs += *sd.value;
    }
    const DensityValue dv = density_at(mu, x, radii);
    if (!dv.value) all_defined = false;
    if (!all_defined) break;
    const double rhs = cn * *dv.value;
    worst_rel = std::max(worst_rel, std::abs(lhs - rhs) / std::abs(rhs));
    worst_stencil = std::max(worst_stencil, std::abs(stencil_laplacian(mu, x, grid.h() / 8) - rhs) / std::abs(rhs));
  }
  double worst_abs = 0.0;
  for (int i = 0; i < 50 && all_defined; ++i) {
    const Vec x = Vec::filled(3, 0.5) + g.direction(3) * g.uniform(1.0 + std::sqrt(3.0) / 2, 4.0);
    const std::optional<double> lap = laplacian_pv(mu, x, schedule);
    if (!lap) all_defined = false;
    else worst_abs = std::max(worst_abs, std::abs(*lap));
  }
  r.seconds = seconds_since(t0);
  r.passed = all_defined && worst_rel <= kPoissonRelError && worst_abs <= kHarmonicAbsError;
  r.summary = fmt::format("interior max rel error {:.2e} <= {:.0e}, exterior max |sum| {:.2e} <= {:.0e}{}", worst_rel,
                          kPoissonRelError, worst_abs, kHarmonicAbsError, all_defined ? "" : ", undefined values");
  r.details = {{"interior_max_relative_error", worst_rel}, {"exterior_max_abs", worst_abs}, {"all_defined", all_defined},
               {"stencil_max_relative_error", worst_stencil}};
  return r;
}

CriterionResult levelset_decay() {
  CriterionResult r{9, "Level-set density decay", false, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  const double R = 1.0, h = 1.0 / 16;
  const int m = static_cast<int>(std::ceil(R / h)) + 1;
  const GridSpec grid(Vec::filled(3, -m * h), h, {2 * m, 2 * m, 2 * m});
  DensityGrid d{grid, std::vector<double>(grid.cell_count(), 0.0)};
  for (std::size_t f = 0; f < grid.cell_count(); ++f)
    if (norm(grid.center(f)) <= R) d.values[f] = 1.0 / (unit_ball_volume(3) * R * R * R);
  const RadonMeasure mu(3, {}, std::move(d));
  // Unit-mass ball of radius 1: P(r) = (3 - r^2) / 2 inside, |P'(0.55)| = 0.55.
  const double rc = 0.55;
  const double c = (3.0 - rc * rc) / 2;
  const std::vector<double> bands{0.2 * rc, 0.1 * rc, 0.05 * rc};
  const LevelSetDensityReport rep = levelset_density_check(mu, c, bands);
  r.passed = true;
  std::vector<std::string> parts;
  for (std::size_t i = 1; i < rep.bands.size(); ++i) {
    const double q = rep.bands[i].mass > 0.0 ? rep.bands[i - 1].mass / rep.bands[i].mass : 0.0;
    r.passed = r.passed && q >= kBandDecay;
    parts.push_back(fmt::format("{:.3f}", q));
  }
  r.seconds = seconds_since(t0);
  r.summary = fmt::format("mass ratios per band halving {} >= {}, verdict {}", fmt::join(parts, ", "), kBandDecay,
                          rep.verdict);
  json bj = json::array();
  for (const BandMass& b : rep.bands) bj.push_back({{"band", b.band}, {"mass", b.mass}, {"cells", b.cells}});
  r.details = {{"level", c}, {"bands", bj}, {"verdict", rep.verdict}};
  return r;
}

CriterionResult differentiability_trend() {
  CriterionResult r{10, "Capacity-sense differentiability trend", true, {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  const Kernel k = make_riesz_kernel(2);
  const std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
  Rng g(10, 0);
  std::vector<Atom> atoms;
  for (int i = 0; i < 4; ++i) atoms.push_back({g.direction(2) * g.uniform(1.0, 2.0), g.uniform(0.25, 1.0)});
  const RadonMeasure mu(2, std::move(atoms));
  std::vector<std::string> parts;
  json per = json::array();
  for (int c = 0; c < 3; ++c) {
    const Vec a = g.point(2, -0.2, 0.2);
    const GradientEstimate est = gradient_potential(k, mu, a, EpsilonSchedule::dyadic());
    if (!est.value) {
      r.passed = false;
      continue;
    }
    const DiffReport good = capacity_diff_index(k, mu, a, *est.value, radii);
    const DiffReport bad = capacity_diff_index(k, mu, a, *est.value + Vec::unit(2, 0) * 0.5, radii);
    double min_q = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < radii.size(); ++i)
      min_q = std::min(min_q, good.per_radius_index[i - 1] / good.per_radius_index[i]);
    const double floor = bad.per_radius_index.back();
    r.passed = r.passed && min_q >= kTrendFactor && floor >= kPerturbedFloor;
    parts.push_back(fmt::format("center {}: min decay {:.3f}, perturbed {:.3f}", c, min_q, floor));
    per.push_back({{"center", std::vector<double>(a.begin(), a.end())},
                   {"index", good.per_radius_index},
                   {"perturbed_index", bad.per_radius_index}});
  }
  r.seconds = seconds_since(t0);
  r.summary = fmt::format("{}; need decay >= {} per halving and perturbed >= {}", fmt::join(parts, "; "), kTrendFactor,
                          kPerturbedFloor);
  r.details = {{"centers", per}};
  return r;
}

}  // namespace

std::vector<int> criterion_ids() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

std::optional<std::string> known_unattainable(int id) {
  if (id == 7)
    return "the flux of the oscillating kernel at radius e^{-pi j} is sin(pi j) V_N e_1 = 0 for every j, so the "
           "sequence converges and no divergence can be observed along it";
  return std::nullopt;
}

CriterionResult run_criterion(int id) {
  switch (id) {
    case 1: return newton_sphere();
    case 2: return capacity_homogeneity();
    case 3: return weak_capacitary();
    case 4: return lebesgue_capacity();
    case 5: return lipschitz_estimate();
    case 6: return gradient_formula();
    case 7: return counterexample_kernel();
    case 8: return poisson_identity();
    case 9: return levelset_decay();
    case 10: return differentiability_trend();
  }
  throw InvalidArgument(fmt::format("unknown criterion {}", id));
}

std::vector<CriterionResult> run_suite(std::span<const int> ids) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id));
  return out;
}

std::string format_line(const CriterionResult& r) {
  return fmt::format("criterion {:>2} {}  {}: {} ({:.1f} s)", r.id, r.passed ? "PASS" : "FAIL", r.name, r.summary,
                     r.seconds);
}

nlohmann::json to_json(const CriterionResult& r) {
  nlohmann::json j{{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"summary", r.summary}, {"details", r.details}};
  if (const auto why = known_unattainable(r.id)) j["known_unattainable"] = *why;
  return j;
}

}  // namespace potlab::suite
