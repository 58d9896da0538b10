#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "potlab/vec.hpp"

namespace potlab {

enum class Parity { even, odd, none };

const char* to_string(Parity p);

namespace detail {

/// Analytic model behind a Kernel. Implementations receive x != 0.
class KernelModel {
 public:
  virtual ~KernelModel() = default;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;
};

}  // namespace detail

/// Kernel K twice continuously differentiable off the origin with
/// |grad^j K(x)| <= C |x|^{-(N-1+j)}, j = 0, 1, 2 (max-entry norms) on |x| <= growth_radius.
///
/// Immutable and cheap to copy; safe to share across threads.
class Kernel {
 public:
  Kernel(std::string name, int dim, double growth_constant, double growth_radius, Parity parity,
         std::optional<double> homogeneity_degree, std::shared_ptr<const detail::KernelModel> model);

  const std::string& name() const { return name_; }
  int dimension() const { return dim_; }
  double growth_constant() const { return growth_constant_; }
  /// Radius up to which the growth bound is declared (infinity when it holds everywhere).
  double growth_radius() const { return growth_radius_; }
  Parity parity() const { return parity_; }
  std::optional<double> homogeneity_degree() const { return homogeneity_degree_; }

  /// Throws InvalidArgument at the origin or on a dimension mismatch.
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  /// Unchecked variants for hot loops; x must be nonzero with matching dimension.
  double value_unchecked(const Vec& x) const { return model_->value(x); }
  Vec gradient_unchecked(const Vec& x) const { return model_->gradient(x); }

 private:
  void check(const Vec& x) const;

  std::string name_;
  int dim_;
  double growth_constant_;
  double growth_radius_;
  Parity parity_;
  std::optional<double> homogeneity_degree_;
  std::shared_ptr<const detail::KernelModel> model_;
};

/// |x|^{-(N-1)}.
Kernel make_riesz_kernel(int dim);
/// |x|^{-(N-2)} for N >= 3, log(1/|x|) for N = 2. Growth bound declared on the unit ball.
Kernel make_newtonian_kernel(int dim);
/// sin(log(1/|x|)) |x|^{-(N-1)} x_1/|x|: odd, not homogeneous, principal values of grad K fail.
Kernel make_oscillating_kernel(int dim);
/// x_1 |x|^{-N}: odd and homogeneous of degree -(N-1); its surface flux is V_N e_1 at every radius.
Kernel make_dipole_kernel(int dim);
/// Kernel by CLI name: "riesz", "newtonian", "oscillating", "dipole".
Kernel make_kernel(const std::string& name, int dim);

struct GrowthAudit {
  /// max over samples of |grad^j K(x)| |x|^{N-1+j}, j = 0, 1, 2.
  std::array<double, 3> ratios{};
  double growth_constant = 0.0;
  bool passed = false;
  std::size_t samples = 0;
  std::string norm = "max-entry";
};

/// Throws InvalidArgument on an empty sample set or a zero sample.
GrowthAudit audit_growth(const Kernel& k, std::span<const Vec> samples);

/// `count` points with log-uniform radius in [r_min, r_max] and uniform direction.
std::vector<Vec> log_uniform_samples(int dim, std::size_t count, double r_min, double r_max,
                                     std::uint64_t seed);

struct SurfaceFlux {
  double radius = 0.0;
  Vec flux;
  int quadrature_nodes = 0;
};

/// Quadrature of  int_{|x|=eps} K(x) x/|x| dsigma(x).
/// N = 2: `nodes`-point trapezoid on the circle. N = 3: `nodes` Gauss–Legendre nodes in cos(polar)
/// times 2*`nodes` uniform azimuthal nodes. N >= 4 throws Unsupported.
SurfaceFlux surface_flux(const Kernel& k, double eps, int nodes = 64);

struct PrincipalVector {
  bool converged = false;
  /// Limit estimate (last flux) when converged.
  Vec limit;
  /// Largest pairwise distance among the last three fluxes.
  double oscillation = 0.0;
  std::vector<SurfaceFlux> fluxes;
};

/// Convergence of the surface flux along a decreasing sequence of radii: converged when the last
/// three fluxes are pairwise within `tolerance` (absolute).
PrincipalVector pv_vector_along(const Kernel& k, std::span<const double> eps_sequence,
                                double tolerance = 1e-8, int nodes = 64);

}  // namespace potlab
