#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "potlab/field.hpp"
#include "potlab/kernels.hpp"
#include "potlab/measures.hpp"

namespace potlab {

struct DominatingOptions {
  /// Ball radii for M(mu); the distances from x to every atom are always added.
  std::vector<double> radii = default_radii();
  /// Truncation radii for T*(mu); the atom distances are always added.
  EpsilonSchedule schedule = EpsilonSchedule::dyadic(-4, 40);
  OverlapOptions overlap;

  static std::vector<double> default_radii();
};

/// I0 = M(mu) + T*(mu) at each point. Both suprema run over the option lists merged with the
/// distances to the atoms, which is exact for atomic measures; with a density part the values are
/// lower bounds. Points on an atom get +infinity.
FieldSample dominating_function(const Kernel& k, const RadonMeasure& mu, std::span<const Vec> points,
                                const DominatingOptions& opts = {});

struct WeakL1Level {
  double t = 0.0;
  std::size_t cells = 0;
  double measure = 0.0;
  double t_times_measure = 0.0;
};

struct WeakL1Report {
  std::vector<WeakL1Level> levels;
  double sup = 0.0;
  double argsup_t = 0.0;
};

/// sup over t of t * h^N * #{cells with value > t} for a sample taken at cell centers of its grid.
/// Levels with fewer than `min_cells` cells are reported but left out of the supremum.
/// Throws InvalidArgument when the sample has no grid or is not scalar.
WeakL1Report weak_l1_norm(const FieldSample& field, std::span<const double> t_samples, std::size_t min_cells = 1);

/// t = lo * 2^{j / per_octave} up to the first value >= hi.
std::vector<double> geometric_t_samples(double lo, double hi, int per_octave = 8);

enum class PairSampler {
  uniform,
  /// Each point is a uniformly chosen atom (or density cell center) plus a Gaussian offset.
  near_support,
};

const char* to_string(PairSampler s);

struct LipschitzOptions {
  PairSampler sampler = PairSampler::uniform;
  /// Standard deviation of the near-support offsets.
  double near_scale = 0.1;
  /// Cells per axis of the grid used for the weak-L1 estimate of I0 (the drift uses twice this).
  int grid_cells = 64;
  /// Smallest superlevel set, in cells of the coarse grid, entering the weak-L1 supremum.
  std::size_t min_cells = 64;
  DominatingOptions dominating;
};

struct PairRecord {
  Vec x, y;
  double ratio = 0.0;
};

struct LipschitzReport {
  std::size_t pairs_requested = 0;
  std::size_t pairs_tested = 0;
  /// Pairs with a point on an atom (u = +infinity there).
  std::size_t excluded_pairs = 0;
  /// Tested pairs with I0(x) + I0(y) = 0; their ratio counts as 0.
  std::size_t zero_denominator_pairs = 0;
  double worst_ratio = 0.0;
  double empirical_C = 0.0;
  PairRecord worst_pair;
  double weak_l1_of_I = 0.0;
  double weak_l1_fine = 0.0;
  double refinement_drift = 0.0;
  std::uint64_t seed = 0;
  std::string sampler;
};

/// |u(x) - u(y)| / (|x - y| (I0(x) + I0(y))), or +infinity when a point is on an atom.
double lipschitz_ratio(const Kernel& k, const RadonMeasure& mu, const Vec& x, const Vec& y,
                       const DominatingOptions& opts = {});

/// Ratios over `pair_count` seeded pairs in `window` plus the weak-L1 estimate of I0 on window
/// grids of grid_cells and 2 grid_cells per axis. Throws InvalidArgument when the window does not
/// contain spt mu or pair_count is 0, and when every pair is excluded.
LipschitzReport lipschitz_check(const Kernel& k, const RadonMeasure& mu, std::size_t pair_count,
                                const BoundingBox& window, std::uint64_t seed, const LipschitzOptions& opts = {});

}  // namespace potlab
