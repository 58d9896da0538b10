#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "potlab/errors.hpp"
#include "potlab/quadrature.hpp"

using namespace potlab;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n = 1; n <= 12; ++n) {
    const GaussRule& r = gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " p=" << p;
    }
  }
}

TEST(GaussLegendre, RejectsBadOrder) {
  EXPECT_THROW(gauss_legendre(0), InvalidArgument);
  EXPECT_THROW(gauss_legendre(129), InvalidArgument);
}

TEST(IntegrateBox, TensorMonomial) {
  const Vec lo{0.0, -1.0, 0.5}, hi{1.0, 2.0, 1.5};
  const double v = integrate_box([](const Vec& y) { return y[0] * y[0] * y[1] * y[2]; }, lo, hi, 3, 0.0);
  EXPECT_NEAR(v, (1.0 / 3.0) * 1.5 * 1.0, 1e-13);
}

// Reference values reduce each pyramid to a face integral done by adaptive quadrature.
TEST(IntegrateBoxSingular, RieszCubeAtCenter) {
  auto f = [](const Vec& y) { return 1.0 / norm(y); };
  const Vec c3 = Vec::zero(3);
  EXPECT_NEAR(integrate_box_singular(f, Vec::filled(3, -0.5), Vec::filled(3, 0.5), c3, 5, 0.0), 2.3800773639795536,
              1e-6);
  const Vec c2 = Vec::zero(2);
  EXPECT_NEAR(integrate_box_singular(f, Vec::filled(2, -0.5), Vec::filled(2, 0.5), c2, 5, 0.0), 3.525494348078172,
              1e-6);
}

TEST(IntegrateBoxSingular, OffCenterAndCornerAgreeWithSplitting) {
  auto f = [](const Vec& y) { return 1.0 / norm(y); };
  const Vec lo = Vec::filled(3, 0.0), hi = Vec::filled(3, 1.0);
  const Vec corner = Vec::filled(3, 0.0);
  // One octant of the side-2 cube centered at the apex; the integral scales like side^2.
  EXPECT_NEAR(integrate_box_singular(f, lo, hi, corner, 5, 0.0), 2.3800773639795536 * 4.0 / 8.0, 1e-6);
}

TEST(IntegrateBoxSingular, SmoothIntegrandMatchesTensorRule) {
  auto f = [](const Vec& y) { return std::exp(y[0] - 0.3 * y[1]); };
  const Vec lo{0.0, 0.0}, hi{1.0, 2.0}, p{0.25, 1.5};
  EXPECT_NEAR(integrate_box_singular(f, lo, hi, p, 8, 0.0), integrate_box(f, lo, hi, 8, 0.0), 1e-12);
}
