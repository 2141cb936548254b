#include "vireg/feasible_set.hpp"

#include <cmath>

namespace vireg {

const char* to_string(SetKind kind) {
  switch (kind) {
    case SetKind::WholeSpace: return "whole-space";
    case SetKind::Box: return "box";
    case SetKind::Ball: return "ball";
    case SetKind::NonnegativeOrthant: return "nonnegative-orthant";
  }
  return "?";
}

FeasibleSet FeasibleSet::whole_space(Index dim) {
  if (dim <= 0) throw ConfigError("whole_space: dimension must be positive");
  return FeasibleSet(SetKind::WholeSpace, dim);
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw ConfigError("box: bounds must have equal positive dimension");
  }
  if ((lower.array() > upper.array()).any()) {
    throw ConfigError("box: requires lower <= upper componentwise");
  }
  FeasibleSet s(SetKind::Box, lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (center.size() == 0) throw ConfigError("ball: dimension must be positive");
  if (!(radius > 0.0)) throw ConfigError("ball: radius must be positive");
  FeasibleSet s(SetKind::Ball, center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

FeasibleSet FeasibleSet::nonnegative_orthant(Index dim) {
  if (dim <= 0) throw ConfigError("orthant: dimension must be positive");
  return FeasibleSet(SetKind::NonnegativeOrthant, dim);
}

std::optional<double> FeasibleSet::diameter() const {
  switch (kind_) {
    case SetKind::Box: return (upper_ - lower_).norm();
    case SetKind::Ball: return 2.0 * radius_;
    default: return std::nullopt;
  }
}

Vector FeasibleSet::project(const Vector& z) const {
  check_dimension(dim_, z.size(), "project");
  switch (kind_) {
    case SetKind::WholeSpace:
      return z;
    case SetKind::Box:
      return z.cwiseMax(lower_).cwiseMin(upper_);
    case SetKind::Ball: {
      const Vector d = z - center_;
      const double nrm = d.norm();
      if (nrm <= radius_) return z;
      return center_ + (radius_ / nrm) * d;
    }
    case SetKind::NonnegativeOrthant:
      return z.cwiseMax(0.0);
  }
  return z;
}

bool FeasibleSet::contains(const Vector& z, double tol) const {
  check_dimension(dim_, z.size(), "contains");
  switch (kind_) {
    case SetKind::WholeSpace:
      return true;
    case SetKind::Box:
      return ((z - lower_).minCoeff() >= -tol) &&
             ((upper_ - z).minCoeff() >= -tol);
    case SetKind::Ball:
      return (z - center_).norm() <= radius_ + tol;
    case SetKind::NonnegativeOrthant:
      return z.minCoeff() >= -tol;
  }
  return false;
}

}  // namespace vireg
