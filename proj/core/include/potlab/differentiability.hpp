#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potlab/capacity.hpp"
#include "potlab/field.hpp"
#include "potlab/kernels.hpp"
#include "potlab/measures.hpp"
#include "potlab/operators.hpp"

namespace potlab {

struct DiffOptions {
  /// The window mesh at radius r is r / mesh_ratio.
  int mesh_ratio = 16;
  /// Default t samples: median(remainder) * 2^k, k = t_min_exponent..t_max_exponent.
  int t_min_exponent = -10;
  int t_max_exponent = 20;
  /// Skip the LP at t when t * margin * Cap(window) cannot beat the running supremum.
  bool prune = true;
  double prune_margin = 1.25;
  /// Atoms within 3h/2 (per axis) of a window cell enter through their average over the cell
  /// instead of the value at its center.
  bool cell_averaged = false;
  CapacityOptions capacity;
  /// Schedule and tolerances for the gradient used by s_functional.
  EpsilonSchedule schedule = EpsilonSchedule::dyadic();
  GradientOptions gradient;
};

struct DiffLevel {
  double t = 0.0;
  std::size_t cells = 0;
  /// Lebesgue measure of the superlevel set.
  double measure = 0.0;
  /// Cap_est of the set, nullopt when the level was pruned.
  std::optional<double> capacity;
  double t_times_capacity = 0.0;
};

struct DiffRadius {
  double r = 0.0;
  double h = 0.0;
  double ball_capacity = 0.0;
  double window_capacity = 0.0;
  double index = 0.0;
  double argsup_t = 0.0;
  std::vector<DiffLevel> levels;
};

struct DiffReport {
  Vec center;
  Vec gradient;
  std::vector<double> radii;
  std::vector<double> per_radius_index;
  /// "differentiable-trend" or "inconclusive".
  std::string verdict;
  std::vector<DiffRadius> details;
  int mesh_ratio = 16;
  std::size_t lp_solves = 0;
};

/// |u(x) - u(a) - v.(x - a)| / |x - a| at the cell centers x of B(a, r) on the lattice of side h
/// that has a at a cell center, the center cell excluded. The grid of the sample is the bounding
/// lattice box. Throws InvalidArgument when a is an atom of mu or h > r/8.
FieldSample remainder_field(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v, double r,
                            double h);

/// median(remainder) * 2^k for the exponent range of `opts`; empty when the median is 0.
std::vector<double> default_t_samples(const FieldSample& remainder, const DiffOptions& opts = {});

/// "differentiable-trend" when the last index is at most half the one two halvings earlier.
std::string diff_verdict(std::span<const double> indices);

/// Per radius (decreasing): sup_t t Cap_est({remainder > t}) / Cap_est(B(a, r)), both on the mesh
/// r / mesh_ratio. Explicit `t_samples` are used at every radius; otherwise default_t_samples.
DiffReport capacity_diff_index(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v,
                               std::span<const double> radii,
                               const std::optional<std::vector<double>>& t_samples = std::nullopt,
                               const DiffOptions& opts = {});

/// Largest capacity index over `radii` with v = gradient_potential(a); nullopt when the gradient
/// is undefined.
std::optional<double> s_functional(const Kernel& k, const RadonMeasure& mu, const Vec& a,
                                   std::span<const double> radii,
                                   const std::optional<std::vector<double>>& t_samples = std::nullopt,
                                   const DiffOptions& opts = {});

/// Per radius (mean over window cells of remainder^p)^{1/p}. Requires 1 <= p < N/(N-1).
std::vector<double> lp_diff_index(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v, double p,
                                  std::span<const double> radii, const DiffOptions& opts = {});

/// Per radius (r^{-N} sup_t t^q |{remainder > t}|)^{1/q}, q = N/(N-1).
std::vector<double> weak_lp_diff_index(const Kernel& k, const RadonMeasure& mu, const Vec& a, const Vec& v,
                                       std::span<const double> radii,
                                       const std::optional<std::vector<double>>& t_samples = std::nullopt,
                                       const DiffOptions& opts = {});

}  // namespace potlab
