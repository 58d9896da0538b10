#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "potlab/errors.hpp"
#include "potlab/kernels.hpp"
#include "prop.hpp"

using namespace potlab;
using potlab::testing::Gen;

namespace {

std::vector<Kernel> builtin_kernels(int dim) {
  return {make_riesz_kernel(dim), make_newtonian_kernel(dim), make_oscillating_kernel(dim), make_dipole_kernel(dim)};
}

double rel_vec(const Vec& a, const Vec& b) { return distance(a, b) / std::max(norm(b), 1e-300); }

}  // namespace

TEST(Riesz, Values) {
  EXPECT_DOUBLE_EQ(make_riesz_kernel(3).value({1, 0, 0}), 1.0);
  const Vec g = make_riesz_kernel(3).gradient({2, 0, 0});
  EXPECT_DOUBLE_EQ(g[0], -0.25);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_DOUBLE_EQ(make_riesz_kernel(2).value({0, 3}), 1.0 / 3.0);
  EXPECT_EQ(make_riesz_kernel(3).parity(), Parity::even);
  EXPECT_EQ(*make_riesz_kernel(3).homogeneity_degree(), -2.0);
}

TEST(Newtonian, Values) {
  EXPECT_DOUBLE_EQ(make_newtonian_kernel(3).value({0, 0, 2}), 0.5);
  EXPECT_DOUBLE_EQ(make_newtonian_kernel(2).value({1, 0}), 0.0);
  const Vec g = make_newtonian_kernel(3).gradient({1, 0, 0});
  EXPECT_DOUBLE_EQ(g[0], -1.0);
}

TEST(Oscillating, Values) {
  for (int n : {2, 3}) {
    const Kernel k = make_oscillating_kernel(n);
    EXPECT_NEAR(k.value(Vec::unit(n, 1)), 0.0, 1e-15);
    const double r = std::exp(-std::numbers::pi / 2);
    EXPECT_NEAR(k.value(Vec::unit(n, 0) * r), std::exp((n - 1) * std::numbers::pi / 2), 1e-12);
    EXPECT_EQ(k.parity(), Parity::odd);
    EXPECT_FALSE(k.homogeneity_degree());
  }
}

TEST(Kernel, RejectsOriginAndBadDimension) {
  const Kernel k = make_riesz_kernel(3);
  EXPECT_THROW(k.value(Vec::zero(3)), InvalidArgument);
  EXPECT_THROW(k.gradient(Vec::zero(3)), InvalidArgument);
  EXPECT_THROW(k.hessian(Vec::zero(3)), InvalidArgument);
  EXPECT_THROW(k.value(Vec{1.0, 0.0}), InvalidArgument);
  EXPECT_THROW(make_riesz_kernel(1), InvalidArgument);
  EXPECT_THROW(make_newtonian_kernel(1), InvalidArgument);
  EXPECT_THROW(make_oscillating_kernel(0), InvalidArgument);
  EXPECT_THROW(make_kernel("gauss", 3), InvalidArgument);
}

TEST(KernelProperty, GradientAndHessianMatchFiniteDifferences) {
  for (int n : {2, 3, 4}) {
    for (const Kernel& k : builtin_kernels(n)) {
      for (int trial = 0; trial < 100; ++trial) {
        Gen g(11, trial);
        const Vec x = g.direction(n) * std::exp(g.uniform(std::log(0.1), std::log(10.0)));
        const double step = 1e-5 * norm(x);
        Vec fd(n);
        Mat fdh(n);
        for (int i = 0; i < n; ++i) {
          const Vec e = Vec::unit(n, i) * step;
          fd[i] = (k.value(x + e) - k.value(x - e)) / (2 * step);
          const Vec dg = (k.gradient(x + e) - k.gradient(x - e)) * (1.0 / (2 * step));
          for (int j = 0; j < n; ++j) fdh(j, i) = dg[j];
        }
        const Vec grad = k.gradient(x);
        const Mat hess = k.hessian(x);
        EXPECT_LE(rel_vec(fd, grad), 1e-6) << k.name() << " N=" << n << " trial " << trial;
        double hd = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) hd = std::max(hd, std::abs(fdh(i, j) - hess(i, j)));
        EXPECT_LE(hd / std::max(hess.max_abs(), 1e-300), 1e-6) << k.name() << " N=" << n << " trial " << trial;
      }
    }
  }
}

TEST(KernelProperty, HessianIsSymmetric) {
  for (int n : {2, 3}) {
    for (const Kernel& k : builtin_kernels(n)) {
      Gen g(5, n);
      const Mat h = k.hessian(g.point(n, -2, 2));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) EXPECT_NEAR(h(i, j), h(j, i), 1e-12 * h.max_abs());
    }
  }
}

TEST(KernelProperty, DeclaredParityHolds) {
  for (int n : {2, 3, 5}) {
    for (const Kernel& k : builtin_kernels(n)) {
      if (k.parity() == Parity::none) continue;
      const double sign = k.parity() == Parity::even ? 1.0 : -1.0;
      for (int trial = 0; trial < 100; ++trial) {
        Gen g(23, trial);
        const Vec x = g.point(n, -3, 3);
        EXPECT_NEAR(k.value(-x), sign * k.value(x), 1e-13 * std::abs(k.value(x)) + 1e-300);
      }
    }
  }
}

TEST(GrowthAudit, BuiltinKernelsPassOnUnitBall) {
  for (int n : {2, 3, 4}) {
    const auto samples = log_uniform_samples(n, 1000, 1e-6, 1.0, 99);
    for (const Kernel& k : builtin_kernels(n)) {
      const GrowthAudit a = audit_growth(k, samples);
      EXPECT_TRUE(a.passed) << k.name() << " N=" << n << " ratios " << a.ratios[0] << " " << a.ratios[1] << " "
                            << a.ratios[2];
      EXPECT_EQ(a.norm, "max-entry");
      EXPECT_EQ(a.samples, 1000u);
    }
  }
}

TEST(GrowthAudit, HomogeneousKernelsPassEverywhere) {
  for (int n : {2, 3}) {
    const auto samples = log_uniform_samples(n, 1000, 1e-6, 1e6, 7);
    EXPECT_TRUE(audit_growth(make_riesz_kernel(n), samples).passed);
    EXPECT_TRUE(audit_growth(make_dipole_kernel(n), samples).passed);
  }
}

TEST(GrowthAudit, RieszZeroOrderRatioIsOne) {
  const auto samples = log_uniform_samples(3, 200, 1e-3, 1e3, 3);
  EXPECT_NEAR(audit_growth(make_riesz_kernel(3), samples).ratios[0], 1.0, 1e-12);
}

TEST(GrowthAudit, NewtonianRatioGrowsOutsideUnitBall) {
  const Kernel k = make_newtonian_kernel(3);
  const std::vector<Vec> far{{100.0, 0.0, 0.0}};
  const GrowthAudit a = audit_growth(k, far);
  EXPECT_NEAR(a.ratios[0], 100.0, 1e-10);
  EXPECT_FALSE(a.passed);
}

// Dense-sampling oracle: the supremum of |K| |x|^{N-1} = |sin(log 1/r)| |x_1|/|x| is 1.
TEST(GrowthAudit, OscillatingMaximaFinite) {
  const auto samples = log_uniform_samples(2, 1000, 1e-6, 1.0, 17);
  const GrowthAudit a = audit_growth(make_oscillating_kernel(2), samples);
  EXPECT_LE(a.ratios[0], 1.0);
  EXPECT_GT(a.ratios[0], 0.9);
  EXPECT_TRUE(std::isfinite(a.ratios[1]) && std::isfinite(a.ratios[2]));
}

TEST(GrowthAudit, RejectsEmptyAndZero) {
  const Kernel k = make_riesz_kernel(2);
  EXPECT_THROW(audit_growth(k, {}), InvalidArgument);
  const std::vector<Vec> z{Vec::zero(2)};
  EXPECT_THROW(audit_growth(k, z), InvalidArgument);
}

TEST(SurfaceFlux, EvenKernelVanishes) {
  for (int n : {2, 3})
    for (double eps : {1e-3, 0.1, 1.0, 7.0}) EXPECT_LE(max_abs(surface_flux(make_riesz_kernel(n), eps).flux), 1e-10);
}

TEST(SurfaceFlux, DipoleIndependentOfRadius) {
  for (int n : {2, 3}) {
    const Kernel k = make_dipole_kernel(n);
    for (double eps : {1e-4, 0.3, 2.0}) {
      const Vec a = surface_flux(k, eps).flux, b = surface_flux(k, 2 * eps).flux;
      EXPECT_LE(distance(a, b), 1e-10);
      EXPECT_NEAR(a[0], unit_ball_volume(n), 1e-10);
    }
  }
}

TEST(SurfaceFlux, OscillatingDiffersAcrossHalfPeriods) {
  const Kernel k = make_oscillating_kernel(2);
  const Vec a = surface_flux(k, std::exp(-std::numbers::pi / 2)).flux;
  const Vec b = surface_flux(k, std::exp(-3 * std::numbers::pi / 2)).flux;
  EXPECT_GT(distance(a, b), 1.0);
}

TEST(SurfaceFlux, BoundedByAreaTimesConstant) {
  for (int n : {2, 3}) {
    for (const Kernel& k : builtin_kernels(n)) {
      for (int j = 0; j < 30; ++j) {
        const double eps = std::exp(-0.5 * j);
        EXPECT_LE(norm(surface_flux(k, eps).flux),
                  unit_sphere_area(n) * k.growth_constant() * (1 + 1e-12)) << k.name();
      }
    }
  }
}

TEST(SurfaceFlux, Rejects) {
  EXPECT_THROW(surface_flux(make_riesz_kernel(3), 0.0), InvalidArgument);
  EXPECT_THROW(surface_flux(make_riesz_kernel(4), 1.0), Unsupported);
}

TEST(PrincipalVector, EvenKernelLimitIsZero) {
  const std::vector<double> eps{1.0, 0.5, 0.25, 0.125};
  const PrincipalVector pv = pv_vector_along(make_riesz_kernel(3), eps);
  ASSERT_TRUE(pv.converged);
  EXPECT_LE(max_abs(pv.limit), 1e-10);
}

TEST(PrincipalVector, OscillatingConvergesOnFullPeriods) {
  std::vector<double> eps;
  for (int j = 1; j <= 5; ++j) eps.push_back(std::exp(-2 * std::numbers::pi * j));
  for (int n : {2, 3}) {
    const PrincipalVector pv = pv_vector_along(make_oscillating_kernel(n), eps);
    EXPECT_TRUE(pv.converged);
    EXPECT_LE(pv.oscillation, 1e-8);
  }
}

TEST(PrincipalVector, OscillatingOffsetHalfPeriodsAlternate) {
  std::vector<double> eps;
  for (int j = 0; j < 6; ++j) eps.push_back(std::exp(-std::numbers::pi / 2 - std::numbers::pi * j));
  const PrincipalVector pv = pv_vector_along(make_oscillating_kernel(2), eps);
  EXPECT_FALSE(pv.converged);
  EXPECT_NEAR(pv.oscillation, 2 * unit_ball_volume(2), 1e-8);
}

TEST(PrincipalVector, RejectsShortOrUnsortedSequences) {
  const Kernel k = make_riesz_kernel(2);
  EXPECT_THROW(pv_vector_along(k, std::vector<double>{1.0, 0.5}), InvalidArgument);
  EXPECT_THROW(pv_vector_along(k, std::vector<double>{1.0, 2.0, 0.5}), InvalidArgument);
}
