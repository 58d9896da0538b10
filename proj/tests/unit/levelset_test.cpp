#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "potlab/errors.hpp"
#include "potlab/levelset.hpp"
#include "potlab/operators.hpp"
#include "prop.hpp"

using namespace potlab;
using potlab::testing::Gen;

namespace {

// Bump (1 - |y - c|^2 / R^2)^2 on [0, 1]^3 at h = 1/16, unit mass.
RadonMeasure smooth_bump() {
  const double R = 0.4;
  const Vec c{0.5, 0.5, 0.5};
  const GridSpec grid(Vec{0.0, 0.0, 0.0}, 1.0 / 16, {16, 16, 16});
  DensityGrid d = sample_density(grid, [&](const Vec& y) {
    const double s = 1.0 - norm2(y - c) / (R * R);
    return s > 0.0 ? s * s : 0.0;
  });
  double mass = 0.0;
  for (double v : d.values) mass += v * grid.cell_volume();
  for (double& v : d.values) v /= mass;
  return RadonMeasure(3, {}, std::move(d));
}

RadonMeasure uniform_ball(double R, double h) {
  const int m = static_cast<int>(std::ceil(R / h)) + 1;
  const GridSpec grid(Vec::filled(3, -m * h), h, {2 * m, 2 * m, 2 * m});
  DensityGrid d{grid, std::vector<double>(grid.cell_count(), 0.0)};
  const double rho = 1.0 / (unit_ball_volume(3) * R * R * R);
  for (std::size_t f = 0; f < grid.cell_count(); ++f)
    if (norm(grid.center(f)) <= R) d.values[f] = rho;
  return RadonMeasure(3, {}, std::move(d));
}

Vec jittered_center(const GridSpec& grid, std::size_t f, Gen& g) {
  Vec x = grid.center(f);
  for (int i = 0; i < grid.dim(); ++i) x[i] += g.uniform(-0.125, 0.125) * grid.h();
  return x;
}

}  // namespace

TEST(NewtonianGradient, SingleAtom) {
  const RadonMeasure a3(3, {{Vec::zero(3), 1.0}});
  const Vec x3{2.0, 0.0, 0.0};
  const FieldSample g3 = newtonian_gradient(a3, std::span<const Vec>(&x3, 1));
  EXPECT_NEAR(g3.at(0, 0), -0.25, 1e-15);
  EXPECT_EQ(g3.at(0, 1), 0.0);
  EXPECT_EQ(g3.at(0, 2), 0.0);

  const RadonMeasure a2(2, {{Vec::zero(2), 1.0}});
  const Vec x2{2.0, 0.0};
  EXPECT_NEAR(newtonian_gradient(a2, std::span<const Vec>(&x2, 1)).at(0, 0), -0.5, 1e-15);

  const RadonMeasure zero(3);
  for (double v : newtonian_gradient(zero, std::span<const Vec>(&x3, 1)).values) EXPECT_EQ(v, 0.0);

  const Vec on = Vec::zero(3);
  EXPECT_THROW(newtonian_gradient(a3, std::span<const Vec>(&on, 1)), InvalidArgument);
  EXPECT_THROW(newtonian_constant(1), InvalidArgument);
  EXPECT_EQ(newtonian_constant(2), -1.0);
  EXPECT_EQ(newtonian_constant(4), -2.0);
}

TEST(NewtonianGradient, MatchesFiniteDifferences) {
  for (int n : {2, 3}) {
    const Kernel k = make_newtonian_kernel(n);
    for (int trial = 0; trial < 6; ++trial) {
      Gen g(70, 10 * n + trial);
      RadonMeasure mu = g.atoms(n, g.integer(1, 5), 0.0, 1.0, -1.0, 1.0);
      if (trial % 2 == 1) {
        const GridSpec grid(Vec::filled(n, 0.25), 0.125, std::vector<int>(n, 4));
        DensityGrid d{grid, {}};
        for (std::size_t f = 0; f < grid.cell_count(); ++f) d.values.push_back(g.uniform(0.0, 2.0));
        mu = mu + RadonMeasure(n, {}, std::move(d));
      }
      std::vector<Vec> xs;
      for (int i = 0; i < 10; ++i) xs.push_back(Vec::filled(n, 0.5) + g.direction(n) * g.uniform(1.3, 3.0));
      const FieldSample grad = newtonian_gradient(mu, xs);
      const double s = 1e-4;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        Vec fd(n);
        for (int j = 0; j < n; ++j) {
          const Vec e = Vec::unit(n, j) * s;
          fd[j] = (potential_at(k, mu, xs[i] + e) - potential_at(k, mu, xs[i] - e)) / (2 * s);
        }
        EXPECT_LE(norm(grad.vector_at(i) - fd), 1e-5 * std::max(norm(fd), 1e-3)) << "n=" << n << " trial=" << trial;
      }
    }
  }
}

TEST(NewtonianGradient, DensityNearFieldMatchesFiniteDifferences) {
  const RadonMeasure mu = smooth_bump();
  const Kernel k = make_newtonian_kernel(3);
  Gen g(71, 0);
  const GridSpec& grid = mu.density()->grid;
  for (int i = 0; i < 10; ++i) {
    const Vec x = jittered_center(grid, grid.locate(g.point(3, 0.3, 0.7)).value(), g);
    const Vec gr = newtonian_gradient(mu, std::span<const Vec>(&x, 1)).vector_at(0);
    const double s = grid.h() / 64;
    Vec fd(3);
    for (int j = 0; j < 3; ++j) {
      const Vec e = Vec::unit(3, j) * s;
      fd[j] = (potential_at(k, mu, x + e) - potential_at(k, mu, x - e)) / (2 * s);
    }
    EXPECT_LE(norm(gr - fd), 1e-3 * std::max(norm(fd), 0.1));
  }
}

TEST(SecondDerivative, FarAtomClosedForm) {
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      Gen g(72, 10 * n + trial);
      const Vec a = g.point(n, 0.0, 1.0);
      const RadonMeasure mu(n, {{a, 1.0}});
      const Vec x = a + g.direction(n) * g.uniform(0.5, 4.0);
      const Vec z = x - a;
      const double r2 = norm2(z);
      for (int j = 0; j < n; ++j) {
        // d_j^2 of |z|^{-(N-2)} (N = 3) and of log(1/|z|) (N = 2).
        const double expected =
            n == 3 ? (3 * z[j] * z[j] - r2) / std::pow(r2, 2.5) : (2 * z[j] * z[j] - r2) / (r2 * r2);
        const SecondDerivative d = second_derivative_pv(mu, x, j, EpsilonSchedule::dyadic());
        ASSERT_TRUE(d.value) << d.status;
        EXPECT_EQ(d.status, "defined");
        EXPECT_NEAR(*d.value, expected, 1e-5 * std::max(1.0, std::abs(expected)));
        EXPECT_EQ(*d.density, 0.0);
      }
    }
  }
}

TEST(SecondDerivative, PreconditionsAndUndefined) {
  const RadonMeasure mu(3, {{Vec::zero(3), 1.0}});
  const EpsilonSchedule s = EpsilonSchedule::dyadic();
  EXPECT_THROW(second_derivative_pv(mu, Vec{1.0, 0.0, 0.0}, 3, s), InvalidArgument);
  EXPECT_THROW(second_derivative_pv(mu, Vec{1.0, 0.0, 0.0}, -1, s), InvalidArgument);
  EXPECT_THROW(second_derivative_pv(mu, Vec{1.0, 0.0}, 0, s), InvalidArgument);
  const SecondDerivative at = second_derivative_pv(mu, Vec::zero(3), 0, s);
  EXPECT_FALSE(at.value);
  EXPECT_EQ(at.status, "principal value");
  EXPECT_FALSE(laplacian_pv(mu, Vec::zero(3), s));
  EXPECT_THROW(stencil_laplacian(mu, Vec{1.0, 0.0, 0.0}, 0.0), InvalidArgument);
}

TEST(SecondDerivative, TraceOfPrincipalValuesVanishes) {
  const RadonMeasure bump = smooth_bump();
  const GridSpec& grid = bump.density()->grid;
  const EpsilonSchedule s = EpsilonSchedule::dyadic();
  for (int trial = 0; trial < 10; ++trial) {
    Gen g(73, trial);
    const RadonMeasure mu = bump + g.atoms(3, g.integer(1, 4), 0.0, 1.0, -1.0, 1.0);
    const Vec x = jittered_center(grid, grid.locate(g.point(3, 0.2, 0.8)).value(), g);
    double trace = 0.0, scale = 0.0, lap = 0.0;
    std::optional<double> dens;
    for (int j = 0; j < 3; ++j) {
      const SecondDerivative d = second_derivative_pv(mu, x, j, s);
      ASSERT_TRUE(d.value) << d.status;
      trace += *d.principal_value;
      scale += std::abs(*d.principal_value);
      lap += *d.value;
      dens = d.density;
    }
    EXPECT_LE(std::abs(trace), 1e-12 * std::max(1.0, scale));
    EXPECT_NEAR(lap, newtonian_constant(3) * 3 * unit_ball_volume(3) * *dens, 1e-9 * std::max(1.0, std::abs(lap)));
    EXPECT_NEAR(*dens, bump.density()->values[grid.locate(x).value()], 1e-9);
  }
}

TEST(SecondDerivative, PoissonMatchesStencilLaplacian) {
  const RadonMeasure mu = smooth_bump();
  const GridSpec& grid = mu.density()->grid;
  const EpsilonSchedule s = EpsilonSchedule::dyadic();
  Gen g(74, 0);
  for (int i = 0; i < 12; ++i) {
    const std::size_t f = grid.locate(g.point(3, 0.3, 0.7)).value();
    const Vec x = jittered_center(grid, f, g);
    const std::optional<double> lap = laplacian_pv(mu, x, s);
    ASSERT_TRUE(lap);
    const double oracle = stencil_laplacian(mu, x, grid.h() / 8);
    EXPECT_NEAR(*lap, oracle, 0.02 * std::abs(oracle));
  }
}

TEST(SecondDerivative, HarmonicOffSupport) {
  const EpsilonSchedule s = EpsilonSchedule::dyadic();
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      Gen g(75, 10 * n + trial);
      RadonMeasure mu = g.atoms(n, g.integer(1, 6), 0.0, 1.0, 0.1, 1.0);
      mu = mu.scaled(1.0 / total_variation(mu));
      for (int i = 0; i < 5; ++i) {
        const Vec x = Vec::filled(n, 0.5) + g.direction(n) * g.uniform(1.0 + std::sqrt(n) / 2, 4.0);
        const std::optional<double> lap = laplacian_pv(mu, x, s);
        ASSERT_TRUE(lap);
        EXPECT_LE(std::abs(*lap), 1e-4);
      }
    }
  }
}

TEST(ExtractLevelSet, AtomAnnulusAndNestedBands) {
  const RadonMeasure mu(3, {{Vec::zero(3), 1.0}});
  const GridSpec grid(Vec::filled(3, -1.0 - 1.0 / 48), 1.0 / 24, {49, 49, 49});
  const FieldSample P = newtonian_potential_on(mu, grid);
  const double r0 = 0.6;
  const LevelSetReport rep = extract_level_set(P, 1.0 / r0, 0.05);
  ASSERT_FALSE(rep.cells_in_band.empty());
  // |1/r - 1/r0| <= band  <=>  r in [1/(1/r0 + band), 1/(1/r0 - band)].
  const double rlo = 1.0 / (1.0 / r0 + 0.05), rhi = 1.0 / (1.0 / r0 - 0.05);
  for (std::size_t f : rep.cells_in_band) {
    const double r = norm(grid.center(f));
    EXPECT_GE(r, rlo - 1e-12);
    EXPECT_LE(r, rhi + 1e-12);
  }
  EXPECT_DOUBLE_EQ(rep.band_volume, rep.cells_in_band.size() * grid.cell_volume());
  EXPECT_TRUE(extract_level_set(P, 1.0 / r0, 0.0).cells_in_band.empty());

  double prev = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> prev_cells;
  for (double band : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    const LevelSetReport b = extract_level_set(P, 1.0 / r0, band);
    EXPECT_LE(b.band_volume, prev);
    if (!prev_cells.empty()) EXPECT_TRUE(std::includes(prev_cells.begin(), prev_cells.end(), b.cells_in_band.begin(), b.cells_in_band.end()));
    prev = b.band_volume;
    prev_cells = b.cells_in_band;
  }
}

TEST(ExtractLevelSet, Preconditions) {
  const RadonMeasure mu(2, {{Vec::zero(2), 1.0}});
  FieldSample loose = potential(make_newtonian_kernel(2), mu, std::vector<Vec>{Vec{1.0, 1.0}});
  EXPECT_THROW(extract_level_set(loose, 0.0, 0.1), InvalidArgument);
  const GridSpec grid(Vec{0.5, 0.5}, 0.5, {2, 2});
  const FieldSample P = newtonian_potential_on(mu, grid);
  EXPECT_THROW(extract_level_set(P, 0.0, -0.1), InvalidArgument);
  EXPECT_THROW(newtonian_potential_on(RadonMeasure(3), grid), InvalidArgument);
}

TEST(LevelSetDensity, UniformBallMassDecaysWithBand) {
  const double R = 1.0, h = 1.0 / 16;
  const RadonMeasure mu = uniform_ball(R, h);
  // Inside the ball P(r) = (3 - r^2) / 2 for unit mass and R = 1, so |P'(r)| = r.
  const double rc = 0.55;
  const double c = (3.0 - rc * rc) / 2;
  const double b0 = rc * 0.2;
  const std::vector<double> bands{b0, b0 / 2, b0 / 4};
  const LevelSetDensityReport rep = levelset_density_check(mu, c, bands);
  ASSERT_EQ(rep.bands.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) {
    ASSERT_GT(rep.bands[i].mass, 0.0);
    EXPECT_GE(rep.bands[i - 1].mass / rep.bands[i].mass, 1.8);
  }
  EXPECT_EQ(rep.verdict, "consistent");
  // Shell oracle: |P - c| <= b is the shell of radii r with |r^2 - rc^2| <= 2b.
  const double rho = 1.0 / unit_ball_volume(3);
  for (const BandMass& bm : rep.bands) {
    const double lo = std::sqrt(rc * rc - 2 * bm.band), hi = std::sqrt(rc * rc + 2 * bm.band);
    const double shell = rho * unit_ball_volume(3) * (hi * hi * hi - lo * lo * lo);
    EXPECT_NEAR(bm.mass, shell, 0.35 * shell);
  }
}

TEST(LevelSetDensity, DegenerateInputs) {
  const RadonMeasure atom(3, {{Vec::zero(3), 1.0}});
  const std::vector<double> bands{0.2, 0.1, 0.05};
  const LevelSetDensityReport a = levelset_density_check(atom, 2.0, bands);
  for (const BandMass& bm : a.bands) {
    EXPECT_EQ(bm.mass, 0.0);
    EXPECT_EQ(bm.cells, 0u);
  }
  const RadonMeasure ball = uniform_ball(1.0, 0.125);
  const LevelSetDensityReport top = levelset_density_check(ball, 10.0, bands);
  for (const BandMass& bm : top.bands) {
    EXPECT_EQ(bm.cells, 0u);
    EXPECT_EQ(bm.mass, 0.0);
  }
  EXPECT_THROW(levelset_density_check(ball, 1.0, std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(levelset_density_check(ball, 1.0, std::vector<double>{0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(levelset_density_check(ball, 1.0, std::vector<double>{0.1, 0.0}), InvalidArgument);
  EXPECT_EQ(levelset_density_check(ball, 1.3, std::vector<double>{0.1, 0.05}).verdict, "inconclusive");
}

TEST(AnalyzeLevelSet, GradientMedianShrinksWithBand) {
  const RadonMeasure mu = sphere_atoms(3, Vec::zero(3), 1.0, 2000);
  const GridSpec grid(Vec::filled(3, -1.5), 0.125, {24, 24, 24});
  const FieldSample P = newtonian_potential_on(mu, grid);
  std::vector<double> medians;
  for (double band : {0.2, 0.1, 0.05}) {
    LevelSetReport rep = extract_level_set(P, 1.0, band);
    analyze_level_set(rep, mu, EpsilonSchedule::dyadic(0, 20));
    ASSERT_EQ(rep.gradient_norms.size(), rep.cells_in_band.size());
    ASSERT_EQ(rep.laplacian_values.size(), rep.cells_in_band.size());
    for (std::size_t i = 0; i < rep.cells_in_band.size(); ++i) {
      EXPECT_FALSE(rep.laplacian_from_stencil[i]);
      ASSERT_TRUE(rep.density_values[i]);
      EXPECT_EQ(*rep.density_values[i], 0.0);
      EXPECT_LE(std::abs(rep.laplacian_values[i]), 1e-6);
    }
    std::vector<double> g = rep.gradient_norms;
    std::nth_element(g.begin(), g.begin() + g.size() / 2, g.end());
    medians.push_back(g[g.size() / 2]);
  }
  EXPECT_LE(medians[1], medians[0]);
  EXPECT_LE(medians[2], medians[1]);
  EXPECT_LT(medians[2], 0.5 * medians[0]);
}

TEST(NewtonianPotentialOn, OwnGridMatchesDirectSummation) {
  Gen g(76, 0);
  const GridSpec grid(Vec{-0.2, 0.1, 0.0}, 0.125, {5, 4, 6});
  DensityGrid d{grid, {}};
  for (std::size_t f = 0; f < grid.cell_count(); ++f) d.values.push_back(g.uniform(-1.0, 2.0));
  const RadonMeasure mu = RadonMeasure(3, {}, std::move(d)) + g.atoms(3, 3, 2.0, 3.0, -1.0, 1.0);
  const FieldSample fast = newtonian_potential_on(mu, grid);
  const FieldSample direct = potential(make_newtonian_kernel(3), mu, grid.centers());
  for (std::size_t f = 0; f < grid.cell_count(); ++f) EXPECT_NEAR(fast.at(f), direct.at(f), 1e-11 * std::max(1.0, std::abs(direct.at(f))));
}
