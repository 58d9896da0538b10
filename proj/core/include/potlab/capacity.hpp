#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potlab/grid.hpp"
#include "potlab/measures.hpp"
#include "potlab/simplex.hpp"
#include "potlab/vec.hpp"

namespace potlab {

/// Union of closed cubes of side h on the lattice anchor + h Z^N; cell k spans
/// anchor + h [k, k+1].
class DiscreteSet {
 public:
  /// Throws InvalidArgument on h <= 0, dimension mismatches or repeated cells.
  DiscreteSet(Vec anchor, double h, std::vector<CellIndex> cells);

  int dimension() const { return anchor_.dim(); }
  const Vec& anchor() const { return anchor_; }
  double h() const { return h_; }
  const std::vector<CellIndex>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  Vec center(std::size_t i) const;
  /// Lebesgue measure count * h^N.
  double measure() const;

  /// The same cells with anchor and h multiplied by lambda > 0.
  DiscreteSet scaled(double lambda) const;
  DiscreteSet translated(const Vec& shift) const;
  bool contains(const CellIndex& cell) const;

  /// Cells of `grid` selected by `mask` (one flag per flat cell).
  static DiscreteSet from_mask(const GridSpec& grid, const std::vector<bool>& mask);
  /// Cells whose center lies in the closed ball B(center, r), on the lattice anchored at
  /// `anchor`.
  static DiscreteSet ball(const Vec& center, double r, double h, const Vec& anchor);

 private:
  Vec anchor_;
  double h_;
  std::vector<CellIndex> cells_;
};

struct CapacityOptions {
  /// Sub-points per cell and axis; 1 uses the cell centers only.
  int refinement = 2;
  /// Solve on orbits of the signed-permutation symmetries of the set (exact reduction).
  bool use_symmetry = true;
  /// Add violated constraints in rounds instead of building the full constraint matrix.
  bool constraint_generation = true;
  int quadrature_order = 5;
  LpOptions lp;
};

struct CapacityEstimate {
  double value = 0.0;
  double mesh = 0.0;
  /// Number of constraint points of the full (unreduced) program.
  std::size_t constraint_points = 0;
  std::string direction = "upper-biased";
  /// Total mass per cell, aligned with DiscreteSet::cells().
  std::vector<double> weights;
  /// Largest potential of the candidate measure over all constraint points.
  double certificate_max_constraint = 0.0;
  std::size_t variables = 0;
  std::size_t constraints_used = 0;
  std::size_t symmetry_order = 1;
  std::size_t iterations = 0;
};

/// Potential at p of a unit mass spread uniformly over the unit cube centered at 0 (unit
/// lattice): the cube average of |p - y|^{1-N} for |p|_inf < 3/2, |p|^{1-N} beyond that.
double unit_cell_potential(const Vec& p, int quadrature_order = 5);

/// max sum_c w_c subject to w >= 0 and sum_c w_c Phi(p, c) <= 1 at every constraint point p
/// (cell centers plus refinement^N sub-points per cell). Throws InvalidArgument on an empty set
/// and SolverError when the simplex cap is exceeded.
CapacityEstimate capacity_lp(const DiscreteSet& E, const CapacityOptions& opts = {});

enum class BallAlignment {
  /// Ball center on a lattice vertex.
  vertex,
  /// Ball center at a cell center.
  center,
};

/// capacity_lp of DiscreteSet::ball(center, r, h). Requires h <= r/8.
CapacityEstimate capacity_of_ball(int dim, double r, double h, BallAlignment align = BallAlignment::vertex,
                                  const CapacityOptions& opts = {});

struct WeakCapacityLevel {
  double t = 0.0;
  std::size_t cells = 0;
  double capacity = 0.0;
  double t_times_capacity = 0.0;
};

struct WeakNormReport {
  std::vector<WeakCapacityLevel> levels;
  double sup = 0.0;
  double argsup_t = 0.0;
  double total_variation = 0.0;
};

/// sup over t of t Cap({P_mu > t}) with P_mu the Riesz potential of mu averaged over each window
/// cell; density cells of mu enter as atoms at their centers. Throws InvalidArgument for signed mu.
WeakNormReport weak_capacity_norm(const RadonMeasure& mu, const GridSpec& window, std::span<const double> t_samples,
                                  const CapacityOptions& opts = {});

/// Cell-averaged Riesz potential of mu over every window cell, as used by weak_capacity_norm.
std::vector<double> cell_averaged_riesz_potential(const RadonMeasure& mu, const GridSpec& window,
                                                  int quadrature_order = 5);

struct LebesgueCapacityRatio {
  double measure = 0.0;
  double capacity = 0.0;
  /// |E|^{(N-1)/N} / Cap_est(E).
  double ratio = 0.0;
};

LebesgueCapacityRatio lebesgue_capacity_check(const DiscreteSet& E, const CapacityOptions& opts = {});

}  // namespace potlab
