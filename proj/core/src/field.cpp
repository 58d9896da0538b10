#include "potlab/field.hpp"

#include <cmath>

#include "potlab/errors.hpp"

namespace potlab {

const char* to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::potential: return "potential";
    case FieldKind::gradient: return "gradient";
    case FieldKind::maximal: return "maximal";
    case FieldKind::truncated_singular: return "truncated_singular";
    case FieldKind::maximal_singular: return "maximal_singular";
    case FieldKind::remainder: return "remainder";
    case FieldKind::dominating: return "dominating";
    case FieldKind::second_derivative: return "second_derivative";
  }
  return "unknown";
}

FieldSample FieldSample::zeros(FieldKind kind, std::vector<Vec> points, int components) {
  FieldSample f;
  f.kind = kind;
  f.components = components;
  f.values.assign(points.size() * components, 0.0);
  f.points = std::move(points);
  return f;
}

Vec FieldSample::vector_at(std::size_t i) const {
  Vec v(components);
  for (int c = 0; c < components; ++c) v[c] = values[i * components + c];
  return v;
}

EpsilonSchedule::EpsilonSchedule(std::vector<double> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 3) throw InvalidArgument("epsilon schedule needs at least 3 entries");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i] > 0.0) || !std::isfinite(entries_[i]))
      throw InvalidArgument("epsilon schedule entries must be positive and finite");
    if (i > 0 && !(entries_[i] < entries_[i - 1]))
      throw InvalidArgument("epsilon schedule must be strictly decreasing");
  }
}

EpsilonSchedule EpsilonSchedule::dyadic(int first, int last) {
  std::vector<double> e;
  for (int j = first; j <= last; ++j) e.push_back(std::ldexp(1.0, -j));
  return EpsilonSchedule(std::move(e));
}

EpsilonSchedule EpsilonSchedule::geometric(double base, double ratio, int count) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("geometric schedule ratio must lie in (0, 1)");
  std::vector<double> e;
  double v = base;
  for (int j = 0; j < count; ++j, v *= ratio) e.push_back(v);
  return EpsilonSchedule(std::move(e));
}

}  // namespace potlab
