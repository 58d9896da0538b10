#include "potlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "potlab/errors.hpp"
#include "potlab/quadrature.hpp"

namespace potlab {

const char* to_string(Parity p) {
  switch (p) {
    case Parity::even:
      return "even";
    case Parity::odd:
      return "odd";
    case Parity::none:
      return "none";
  }
  return "none";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// r^{-p}.
class PowerModel final : public detail::KernelModel {
 public:
  explicit PowerModel(double p) : p_(p) {}
  double value(const Vec& x) const override { return std::pow(norm2(x), -0.5 * p_); }
  Vec gradient(const Vec& x) const override {
    const double r2 = norm2(x);
    return x * (-p_ * std::pow(r2, -0.5 * p_ - 1.0));
  }
  Mat hessian(const Vec& x) const override {
    const int n = x.dim();
    const double r2 = norm2(x);
    const double scale = -p_ * std::pow(r2, -0.5 * p_ - 1.0);
    Mat h(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) = scale * ((i == j ? 1.0 : 0.0) - (p_ + 2.0) * x[i] * x[j] / r2);
    return h;
  }

 private:
  double p_;
};

/// log(1/|x|) in the plane.
class LogModel final : public detail::KernelModel {
 public:
  double value(const Vec& x) const override { return -0.5 * std::log(norm2(x)); }
  Vec gradient(const Vec& x) const override { return x * (-1.0 / norm2(x)); }
  Mat hessian(const Vec& x) const override {
    const int n = x.dim();
    const double r2 = norm2(x);
    Mat h(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) = -((i == j ? 1.0 : 0.0) - 2.0 * x[i] * x[j] / r2) / r2;
    return h;
  }
};

/// a(r) x_1 |x|^{-N} with a = sin(log 1/r) (oscillating) or a = 1 (dipole).
class AngularModel final : public detail::KernelModel {
 public:
  explicit AngularModel(bool oscillating) : oscillating_(oscillating) {}

  double value(const Vec& x) const override {
    const int n = x.dim();
    const double r2 = norm2(x);
    return amplitude(r2).s * x[0] * std::pow(r2, -0.5 * n);
  }

  Vec gradient(const Vec& x) const override {
    const int n = x.dim();
    const double r2 = norm2(x);
    const Amp a = amplitude(r2);
    const double g = a.c + n * a.s;
    const double rn = std::pow(r2, -0.5 * n);
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = rn * ((i == 0 ? a.s : 0.0) - g * x[0] * x[i] / r2);
    return out;
  }

  Mat hessian(const Vec& x) const override {
    const int n = x.dim();
    const double r2 = norm2(x);
    const Amp a = amplitude(r2);
    const double g = a.c + n * a.s;
    // d/dx_j of s, c (zero for the dipole).
    const double ds = oscillating_ ? -a.c / r2 : 0.0;
    const double dc = oscillating_ ? a.s / r2 : 0.0;
    const double dg = dc + n * ds;
    const double rn = std::pow(r2, -0.5 * n);
    Mat h(n);
    for (int i = 0; i < n; ++i) {
      const double f = (i == 0 ? a.s : 0.0) - g * x[0] * x[i] / r2;
      for (int j = 0; j < n; ++j) {
        const double dq = ((j == 0 ? x[i] : 0.0) + (i == j ? x[0] : 0.0)) / r2 - 2.0 * x[0] * x[i] * x[j] / (r2 * r2);
        const double df = (i == 0 ? ds * x[j] : 0.0) - dg * x[j] * x[0] * x[i] / r2 - g * dq;
        h(i, j) = rn * df - n * x[j] * rn / r2 * f;
      }
    }
    return h;
  }

 private:
  struct Amp {
    double s, c;
  };
  Amp amplitude(double r2) const {
    if (!oscillating_) return {1.0, 0.0};
    const double l = -0.5 * std::log(r2);
    return {std::sin(l), std::cos(l)};
  }

  bool oscillating_;
};

void require_dim(int dim) {
  if (dim < 2) throw InvalidArgument("kernel dimension must be >= 2");
  if (dim > kMaxDim) throw InvalidArgument("kernel dimension exceeds kMaxDim");
}

}  // namespace

Kernel::Kernel(std::string name, int dim, double growth_constant, double growth_radius, Parity parity,
               std::optional<double> homogeneity_degree, std::shared_ptr<const detail::KernelModel> model)
    : name_(std::move(name)),
      dim_(dim),
      growth_constant_(growth_constant),
      growth_radius_(growth_radius),
      parity_(parity),
      homogeneity_degree_(homogeneity_degree),
      model_(std::move(model)) {}

void Kernel::check(const Vec& x) const {
  if (x.dim() != dim_) throw InvalidArgument("point dimension does not match kernel dimension");
  if (norm2(x) == 0.0) throw InvalidArgument("kernel evaluated at the origin");
}

double Kernel::value(const Vec& x) const {
  check(x);
  return model_->value(x);
}

Vec Kernel::gradient(const Vec& x) const {
  check(x);
  return model_->gradient(x);
}

Mat Kernel::hessian(const Vec& x) const {
  check(x);
  return model_->hessian(x);
}

Kernel make_riesz_kernel(int dim) {
  require_dim(dim);
  const double p = dim - 1;
  return Kernel("riesz", dim, std::max(1.0, p * (p + 1.0)), kInf, Parity::even, -p,
                std::make_shared<PowerModel>(p));
}

Kernel make_newtonian_kernel(int dim) {
  require_dim(dim);
  if (dim == 2) return Kernel("newtonian", 2, 1.0, 1.0, Parity::even, std::nullopt, std::make_shared<LogModel>());
  const double p = dim - 2;
  return Kernel("newtonian", dim, std::max(1.0, p * (p + 1.0)), 1.0, Parity::even, std::nullopt,
                std::make_shared<PowerModel>(p));
}

Kernel make_oscillating_kernel(int dim) {
  require_dim(dim);
  const double n = dim;
  return Kernel("oscillating", dim, n * n + 7.0 * n + 6.0, kInf, Parity::odd, std::nullopt,
                std::make_shared<AngularModel>(true));
}

Kernel make_dipole_kernel(int dim) {
  require_dim(dim);
  const double n = dim;
  return Kernel("dipole", dim, n * n + 5.0 * n, kInf, Parity::odd, -(n - 1.0), std::make_shared<AngularModel>(false));
}

Kernel make_kernel(const std::string& name, int dim) {
  if (name == "riesz") return make_riesz_kernel(dim);
  if (name == "newtonian") return make_newtonian_kernel(dim);
  if (name == "oscillating") return make_oscillating_kernel(dim);
  if (name == "dipole") return make_dipole_kernel(dim);
  throw InvalidArgument("unknown kernel '" + name + "'");
}

GrowthAudit audit_growth(const Kernel& k, std::span<const Vec> samples) {
  if (samples.empty()) throw InvalidArgument("audit_growth needs at least one sample");
  const int n = k.dimension();
  GrowthAudit audit;
  audit.growth_constant = k.growth_constant();
  audit.samples = samples.size();
  for (const Vec& x : samples) {
    const double r = norm(x);
    if (r == 0.0) throw InvalidArgument("audit sample at the origin");
    audit.ratios[0] = std::max(audit.ratios[0], std::abs(k.value(x)) * std::pow(r, n - 1));
    audit.ratios[1] = std::max(audit.ratios[1], max_abs(k.gradient(x)) * std::pow(r, n));
    audit.ratios[2] = std::max(audit.ratios[2], k.hessian(x).max_abs() * std::pow(r, n + 1));
  }
  audit.passed = std::all_of(audit.ratios.begin(), audit.ratios.end(),
                             [&](double v) { return v <= audit.growth_constant; });
  return audit;
}

std::vector<Vec> log_uniform_samples(int dim, std::size_t count, double r_min, double r_max, std::uint64_t seed) {
  if (!(r_min > 0.0) || !(r_max >= r_min)) throw InvalidArgument("log_uniform_samples needs 0 < r_min <= r_max");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(std::log(r_min), std::log(r_max));
  std::vector<Vec> out;
  out.reserve(count);
  while (out.size() < count) {
    Vec d(dim);
    for (int i = 0; i < dim; ++i) d[i] = gauss(rng);
    const double len = norm(d);
    if (len < 1e-12) continue;
    out.push_back(d * (std::exp(unif(rng)) / len));
  }
  return out;
}

SurfaceFlux surface_flux(const Kernel& k, double eps, int nodes) {
  if (!(eps > 0.0)) throw InvalidArgument("surface_flux radius must be positive");
  const int n = k.dimension();
  SurfaceFlux out{eps, Vec(n), nodes};
  if (n == 2) {
    if (nodes < 4) throw InvalidArgument("circle quadrature needs at least 4 nodes");
    const double dtheta = 2.0 * std::numbers::pi / nodes;
    for (int m = 0; m < nodes; ++m) {
      const double th = m * dtheta;
      const Vec dir{std::cos(th), std::sin(th)};
      out.flux += dir * (k.value(dir * eps) * eps * dtheta);
    }
    return out;
  }
  if (n == 3) {
    if (nodes < 2) throw InvalidArgument("sphere quadrature needs at least 2 polar nodes");
    const GaussRule& rule = gauss_legendre(nodes);
    const int naz = 2 * nodes;
    const double dphi = 2.0 * std::numbers::pi / naz;
    for (int a = 0; a < nodes; ++a) {
      const double u = rule.nodes[a];
      const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int b = 0; b < naz; ++b) {
        const double phi = b * dphi;
        const Vec dir{s * std::cos(phi), s * std::sin(phi), u};
        out.flux += dir * (k.value(dir * eps) * eps * eps * rule.weights[a] * dphi);
      }
    }
    return out;
  }
  throw Unsupported("sphere quadrature is implemented for N = 2 and N = 3 only");
}

PrincipalVector pv_vector_along(const Kernel& k, std::span<const double> eps_sequence, double tolerance, int nodes) {
  if (eps_sequence.size() < 3) throw InvalidArgument("pv_vector_along needs at least 3 radii");
  for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
    if (!(eps_sequence[i] > 0.0)) throw InvalidArgument("radii must be positive");
    if (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1])) throw InvalidArgument("radii must strictly decrease");
  }
  PrincipalVector pv;
  pv.fluxes.reserve(eps_sequence.size());
  for (double eps : eps_sequence) pv.fluxes.push_back(surface_flux(k, eps, nodes));
  const std::size_t m = pv.fluxes.size();
  for (std::size_t i = m - 3; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      pv.oscillation = std::max(pv.oscillation, distance(pv.fluxes[i].flux, pv.fluxes[j].flux));
  pv.converged = pv.oscillation <= tolerance;
  pv.limit = pv.fluxes.back().flux;
  return pv;
}

}  // namespace potlab
