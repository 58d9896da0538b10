#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace potlab {

/// Largest ambient dimension the small fixed-size vector types can hold.
inline constexpr int kMaxDim = 8;

/// Point or vector in R^N with N known at run time (N <= kMaxDim).
class Vec {
 public:
  Vec() = default;
  explicit Vec(int dim) : dim_(check_dim(dim)) {}
  Vec(std::initializer_list<double> values) : dim_(check_dim(static_cast<int>(values.size()))) {
    int i = 0;
    for (double v : values) data_[i++] = v;
  }

  static Vec zero(int dim) { return Vec(dim); }
  static Vec unit(int dim, int axis) {
    Vec e(dim);
    e[axis] = 1.0;
    return e;
  }
  static Vec filled(int dim, double value) {
    Vec e(dim);
    for (int i = 0; i < dim; ++i) e[i] = value;
    return e;
  }

  int dim() const { return dim_; }
  double& operator[](int i) {
    assert(i >= 0 && i < dim_);
    return data_[i];
  }
  double operator[](int i) const {
    assert(i >= 0 && i < dim_);
    return data_[i];
  }
  const double* begin() const { return data_.data(); }
  const double* end() const { return data_.data() + dim_; }
  double* begin() { return data_.data(); }
  double* end() { return data_.data() + dim_; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) data_[i] += o.data_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) data_[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.data_[i] != b.data_[i]) return false;
    return true;
  }

 private:
  static int check_dim(int dim) {
    if (dim < 0 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
    return dim;
  }

  std::array<double, kMaxDim> data_{};
  int dim_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}
inline double distance(const Vec& a, const Vec& b) { return norm(a - b); }

/// Square N x N matrix, row-major.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int dim) : dim_(dim) {
    if (dim < 0 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  }
  int dim() const { return dim_; }
  double& operator()(int i, int j) { return data_[i * kMaxDim + j]; }
  double operator()(int i, int j) const { return data_[i * kMaxDim + j]; }
  double trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }
  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
  }

 private:
  std::array<double, kMaxDim * kMaxDim> data_{};
  int dim_ = 0;
};

/// Volume of the unit ball in R^N, by V_N = V_{N-2} * 2*pi/N from V_0 = 1, V_1 = 2.
inline double unit_ball_volume(int dim) {
  if (dim < 0) throw std::invalid_argument("negative dimension");
  double v = (dim % 2 == 0) ? 1.0 : 2.0;
  for (int k = (dim % 2 == 0) ? 2 : 3; k <= dim; k += 2) v *= 2.0 * std::numbers::pi / k;
  return v;
}

/// Surface area of the unit sphere S^{N-1}, N * V_N.
inline double unit_sphere_area(int dim) { return dim * unit_ball_volume(dim); }

}  // namespace potlab
