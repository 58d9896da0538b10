#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "potlab/vec.hpp"

namespace potlab {

/// Nodes and weights of an n-point rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss–Legendre rule, nodes by Newton iteration on P_n. Rules are cached per n.
const GaussRule& gauss_legendre(int n);

/// Tensor Gauss quadrature of f over the box [lo, hi]. `zero` is the additive identity of the
/// result type (a double or a Vec of the integrand's dimension).
template <class F, class R>
R integrate_box(F&& f, const Vec& lo, const Vec& hi, int order, R zero) {
  const int dim = lo.dim();
  const GaussRule& rule = gauss_legendre(order);
  double volume_factor = 1.0;
  for (int i = 0; i < dim; ++i) volume_factor *= 0.5 * (hi[i] - lo[i]);
  R acc = zero;
  std::array<int, kMaxDim> idx{};
  Vec y(dim);
  while (true) {
    double w = volume_factor;
    for (int i = 0; i < dim; ++i) {
      y[i] = 0.5 * (lo[i] + hi[i]) + 0.5 * (hi[i] - lo[i]) * rule.nodes[idx[i]];
      w *= rule.weights[idx[i]];
    }
    acc += f(y) * w;
    int i = 0;
    while (i < dim && ++idx[i] == order) idx[i++] = 0;
    if (i == dim) break;
  }
  return acc;
}

/// Integral of f over the box [lo, hi] where f may be singular (integrably) at `point`.
/// The box is split at the projection of `point` into up to 2^N sub-boxes; each sub-box is
/// cut into N pyramids with apex at that corner and each pyramid mapped to the unit cube by a
/// Duffy transform, which cancels the t^{N-1} volume factor against a |y|^{-(N-1)} singularity.
template <class F, class R>
R integrate_box_singular(F&& f, const Vec& lo, const Vec& hi, const Vec& point, int order, R zero) {
  const int dim = lo.dim();
  const GaussRule& rule = gauss_legendre(order);
  Vec corner(dim);
  for (int i = 0; i < dim; ++i) corner[i] = std::clamp(point[i], lo[i], hi[i]);

  R acc = zero;
  // Each sub-box is described by the signed extent from the corner along each axis.
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Vec extent(dim);
    bool empty = false;
    for (int i = 0; i < dim; ++i) {
      extent[i] = (mask >> i & 1) ? hi[i] - corner[i] : lo[i] - corner[i];
      if (extent[i] == 0.0) empty = true;
    }
    if (empty) continue;
    double jac = 1.0;
    for (int i = 0; i < dim; ++i) jac *= std::abs(extent[i]);

    for (int face = 0; face < dim; ++face) {
      std::array<int, kMaxDim> idx{};
      Vec y(dim);
      while (true) {
        // idx[0] drives t, idx[1..] drive the free face coordinates.
        const double t = 0.5 * (1.0 + rule.nodes[idx[0]]);
        double w = 0.5 * rule.weights[idx[0]] * std::pow(t, dim - 1) * jac;
        int free = 1;
        for (int i = 0; i < dim; ++i) {
          if (i == face) {
            y[i] = corner[i] + t * extent[i];
          } else {
            const double s = 0.5 * (1.0 + rule.nodes[idx[free]]);
            w *= 0.5 * rule.weights[idx[free]];
            y[i] = corner[i] + t * s * extent[i];
            ++free;
          }
        }
        acc += f(y) * w;
        int i = 0;
        while (i < dim && ++idx[i] == order) idx[i++] = 0;
        if (i == dim) break;
      }
    }
  }
  return acc;
}

}  // namespace potlab
