#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "potlab/grid.hpp"
#include "potlab/vec.hpp"

namespace potlab {

struct Atom {
  Vec location;
  double weight = 0.0;
};

/// Cell-averaged density on a uniform grid: `values[flat]` is the average over that cell.
struct DensityGrid {
  GridSpec grid;
  std::vector<double> values;
};

/// Finite signed measure  sum_i w_i delta_{a_i} + rho d(Lebesgue)  with rho piecewise constant.
class RadonMeasure {
 public:
  explicit RadonMeasure(int dim);
  /// Throws InvalidArgument on dimension mismatches, repeated atom locations or a values/grid
  /// size mismatch.
  RadonMeasure(int dim, std::vector<Atom> atoms, std::optional<DensityGrid> density = std::nullopt);

  int dimension() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<DensityGrid>& density() const { return density_; }
  bool has_density() const { return density_.has_value(); }
  /// Cell side of the density grid, if any.
  std::optional<double> mesh() const;
  bool is_nonnegative() const;
  bool is_zero() const;

  RadonMeasure scaled(double alpha) const;
  RadonMeasure translated(const Vec& shift) const;

  /// Atoms at equal locations merge; density grids must share a grid (or one may be absent).
  friend RadonMeasure operator+(const RadonMeasure& a, const RadonMeasure& b);

 private:
  int dim_;
  std::vector<Atom> atoms_;
  std::optional<DensityGrid> density_;
};

/// Closed ball |x - center| <= radius, or its complement.
struct Region {
  Vec center;
  double radius = 0.0;
  bool complement = false;

  bool contains(const Vec& x) const {
    const bool inside = norm2(x - center) <= radius * radius;
    return complement ? !inside : inside;
  }
};

/// Controls the Monte Carlo cell-ball overlap used by ball masses.
struct OverlapOptions {
  int samples = 10000;
  std::uint64_t seed = 0x5eedcafe;
};

struct BoundingBox {
  Vec lo, hi;
  double diameter() const { return distance(lo, hi); }
};

/// ||mu|| = sum |w_i| + h^N sum |rho_c|.
double total_variation(const RadonMeasure& mu);

/// Signed total mass mu(R^N).
double total_mass(const RadonMeasure& mu);

/// Atoms by location, density cells by center; restrict(mu, R) + restrict(mu, R^c) == mu.
RadonMeasure restrict(const RadonMeasure& mu, const Region& region);

/// mu(B(x, r)) for the closed ball. Atoms exact; density cells exact when fully inside, outside,
/// or containing the ball, fixed-seed Monte Carlo fraction otherwise.
double ball_mass(const RadonMeasure& mu, const Vec& x, double r, const OverlapOptions& opts = {});

/// Bounding box of the atoms and nonzero density cells; nullopt for the zero measure.
std::optional<BoundingBox> support_box(const RadonMeasure& mu);

struct DensityValue {
  Vec location;
  /// Limit of the ball averages, or nullopt when they do not settle.
  std::optional<double> value;
  std::vector<double> radii_used;
  std::vector<double> averages;
};

/// Ball averages mu(B(a,r)) / |B(a,r)| along decreasing radii; the value is the last average when
/// the last three agree to `rel_tolerance` relative. With a density grid the smallest radius must
/// be >= h/4.
DensityValue density_at(const RadonMeasure& mu, const Vec& a, std::span<const double> radii,
                        double rel_tolerance = 1e-3, const OverlapOptions& opts = {});

/// The C^1 bump c (1 - |z|^2)^2 on |z| < 1 with unit integral.
double mollifier(const Vec& z);
/// Normalizing constant (N+2)(N+4) / (8 V_N).
double mollifier_constant(int dim);

/// mu * phi_r as a pure cell-averaged density on a grid of side h_out (default r/8, at most r/4).
/// Density inputs are treated as atoms at cell centers.
RadonMeasure mollify(const RadonMeasure& mu, double r, std::optional<double> h_out = std::nullopt);

/// `count` equal atoms of total mass `mass` on the sphere |x - center| = radius (N = 2: equally
/// spaced on the circle; N = 3: Fibonacci lattice).
RadonMeasure sphere_atoms(int dim, const Vec& center, double radius, std::size_t count, double mass = 1.0);

/// Cell averages over `grid` of a density function (Gauss rule of `order`^N points per cell).
template <class F>
DensityGrid sample_density(const GridSpec& grid, F&& rho, int order = 3);

}  // namespace potlab

#include "potlab/quadrature.hpp"

namespace potlab {

template <class F>
DensityGrid sample_density(const GridSpec& grid, F&& rho, int order) {
  DensityGrid out{grid, std::vector<double>(grid.cell_count())};
  const double vol = grid.cell_volume();
  for (std::size_t f = 0; f < grid.cell_count(); ++f) {
    const CellIndex idx = grid.unflatten(f);
    const Vec lo = grid.lower(idx);
    const Vec hi = lo + Vec::filled(grid.dim(), grid.h());
    out.values[f] = integrate_box([&](const Vec& y) { return rho(y); }, lo, hi, order, 0.0) / vol;
  }
  return out;
}

}  // namespace potlab
