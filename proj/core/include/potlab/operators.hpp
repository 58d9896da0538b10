#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potlab/field.hpp"
#include "potlab/kernels.hpp"
#include "potlab/measures.hpp"

namespace potlab {

/// Evaluation points closer than this to an atom get an infinite potential.
inline constexpr double kAtomExclusion = 1e-12;

/// (K * mu)(x): atoms summed directly, density cells through their centers, except cells within
/// distance h of x (per axis), which are integrated: the singular box rule (5^N nodes per pyramid)
/// split at the projection of x.
FieldSample potential(const Kernel& k, const RadonMeasure& mu, std::span<const Vec> points);
double potential_at(const Kernel& k, const RadonMeasure& mu, const Vec& x);

/// Integral of K(x - y) over the cube [lo, lo + h]^N, singular rule when x is inside or on it.
double cell_integral(const Kernel& k, const Vec& x, const Vec& lo, double h, int order = 5);

/// Cellwise gradient  sum w_i grad K(x - a_i) + h^N sum rho_c grad K(x - c), skipping the cell
/// containing x and any atom within kAtomExclusion. Smooth away from spt mu.
FieldSample gradient_direct(const Kernel& k, const RadonMeasure& mu, std::span<const Vec> points);

/// max over `radii` of |mu(B(x,r))| / |B(x,r)|: a lower bound for M(mu)(x).
FieldSample maximal_function(const RadonMeasure& mu, std::span<const Vec> points, std::span<const double> radii,
                             const OverlapOptions& opts = {});

/// int_{|x-y| > eps} grad K(x - y) dmu(y); density cells enter through their centers.
Vec truncated_singular(const Kernel& k, const RadonMeasure& mu, const Vec& x, double eps);

/// truncated_singular at every schedule entry, computed with one sorted pass.
std::vector<Vec> truncated_singular_along(const Kernel& k, const RadonMeasure& mu, const Vec& x,
                                          const EpsilonSchedule& schedule);

/// max over the schedule of |T_eps mu(x)|: a lower bound for T*(mu)(x).
FieldSample maximal_singular(const Kernel& k, const RadonMeasure& mu, std::span<const Vec> points,
                             const EpsilonSchedule& schedule);

struct GradientOptions {
  /// T_eps(mu)(a) has converged when the last three agree within tolerance * max(1, |T|).
  double tolerance = 1e-6;
  double flux_tolerance = 1e-8;
  double density_tolerance = 1e-3;
  int flux_nodes = 64;
  OverlapOptions overlap;
};

struct GradientEstimate {
  /// T(mu)(a) + L mu~(a), or nullopt when a limit did not settle.
  std::optional<Vec> value;
  std::optional<Vec> principal_part;
  std::optional<Vec> flux_limit;
  std::optional<double> density;
  /// Largest pairwise distance among the last three T_eps values.
  double oscillation = 0.0;
  std::vector<Vec> truncated;
  /// "defined", or which limit failed: "principal value", "flux", "density".
  std::string status;
};

/// grad (K * mu)(a) = T(mu)(a) + L mu~(a) along one fixed schedule. Even kernels have L = 0 and
/// skip the flux and density limits.
GradientEstimate gradient_potential(const Kernel& k, const RadonMeasure& mu, const Vec& a,
                                    const EpsilonSchedule& schedule, const GradientOptions& opts = {});

}  // namespace potlab
