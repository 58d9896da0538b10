#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potlab/field.hpp"
#include "potlab/grid.hpp"
#include "potlab/measures.hpp"

namespace potlab {

/// c_N = -(N-2) for N > 2 and -1 for N = 2.
double newtonian_constant(int dim);

/// c_N (x/|x|^N * mu)(x) = grad P(x) for P the Newtonian potential of mu. Atoms are summed
/// directly; density cells within h (per axis) of x are integrated with the singular box rule, the
/// others through their centers. Throws InvalidArgument at an atom.
FieldSample newtonian_gradient(const RadonMeasure& mu, std::span<const Vec> points);

struct SecondDerivativeOptions {
  /// The principal value has converged when the last three truncations agree within
  /// tolerance * max(1, |T|).
  double tolerance = 1e-6;
  double density_tolerance = 1e-3;
  OverlapOptions overlap;
};

struct SecondDerivative {
  /// c_N (p.v. + V_N mu~), or nullopt when a limit did not settle.
  std::optional<double> value;
  std::optional<double> principal_value;
  std::optional<double> density;
  /// "defined", "principal value" or "density".
  std::string status;
};

/// d_j^2 P(x) = c_N (p.v. (|x|^2 - N x_j^2)/|x|^{N+2} * mu (x) + V_N mu~(x)), j in [0, N).
/// Truncations run along `schedule`; density cells enter through their centers except the cell
/// containing x, whose centered contribution vanishes by symmetry. mu~ is density_at over the
/// schedule entries >= h/4 together with h/4 * 2^{k/4}, k = 0..8; without a density grid the
/// schedule itself is used.
SecondDerivative second_derivative_pv(const RadonMeasure& mu, const Vec& x, int j, const EpsilonSchedule& schedule,
                                      const SecondDerivativeOptions& opts = {});

/// Sum over j of second_derivative_pv; nullopt when any term is undefined.
std::optional<double> laplacian_pv(const RadonMeasure& mu, const Vec& x, const EpsilonSchedule& schedule,
                                   const SecondDerivativeOptions& opts = {});

/// Central-difference Laplacian of the Newtonian potential of mu with step s.
double stencil_laplacian(const RadonMeasure& mu, const Vec& x, double s);

struct LevelSetReport {
  double level = 0.0;
  double band = 0.0;
  /// Flat indices into `grid`.
  std::vector<std::size_t> cells_in_band;
  GridSpec grid;
  std::vector<double> gradient_norms;
  std::vector<double> laplacian_values;
  /// Cells whose Laplacian fell back to the stencil because the principal value did not settle.
  std::vector<bool> laplacian_from_stencil;
  std::vector<std::optional<double>> density_values;
  double band_volume = 0.0;
};

/// Cells of P's grid with |P - c| <= band. P must carry a grid and one value per grid cell.
LevelSetReport extract_level_set(const FieldSample& P, double c, double band);

/// Fills gradient norms, Laplacians (principal value, stencil fallback with step h/8) and
/// mu~ values for the cells of an extracted report.
void analyze_level_set(LevelSetReport& report, const RadonMeasure& mu, const EpsilonSchedule& schedule,
                       const SecondDerivativeOptions& opts = {});

/// The Newtonian potential of mu sampled at the cell centers of `grid`.
FieldSample newtonian_potential_on(const RadonMeasure& mu, const GridSpec& grid);

struct BandMass {
  double band = 0.0;
  std::size_t cells = 0;
  /// sum over band cells of mu~ h^N.
  double mass = 0.0;
  double band_volume = 0.0;
};

struct LevelSetDensityReport {
  double level = 0.0;
  std::vector<BandMass> bands;
  /// "consistent" when each mass ratio between consecutive bands is at least 0.9 times the band
  /// ratio (three or more bands), else "inconclusive".
  std::string verdict;
};

/// Restricted a.c. mass of mu on the bands |P - c| <= band, P sampled at the density cell
/// centers. Bands must be positive and strictly decreasing. A measure without density gives mass 0.
LevelSetDensityReport levelset_density_check(const RadonMeasure& mu, double c, std::span<const double> bands);

}  // namespace potlab
