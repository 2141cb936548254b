#pragma once

#include <optional>

#include "vireg/common.hpp"

namespace vireg {

enum class SetKind { WholeSpace, Box, Ball, NonnegativeOrthant };

const char* to_string(SetKind kind);

/// Constraint set with an exact Euclidean projection. Immutable after
/// construction; safe to share across concurrent solver runs.
///
/// Only shapes with closed-form projections are supported, so a projection
/// is never an inner optimization.
class FeasibleSet {
 public:
  static FeasibleSet whole_space(Index dim);
  static FeasibleSet box(Vector lower, Vector upper);
  static FeasibleSet ball(Vector center, double radius);
  static FeasibleSet nonnegative_orthant(Index dim);

  SetKind kind() const { return kind_; }
  Index dimension() const { return dim_; }
  bool unbounded() const { return !diameter().has_value(); }

  /// Exact Euclidean diameter; nullopt when the set is unbounded.
  std::optional<double> diameter() const;

  /// Euclidean projection. Identity on the whole space.
  Vector project(const Vector& z) const;

  /// Membership up to an absolute violation tolerance.
  bool contains(const Vector& z, double tol = 1e-12) const;

  // Box accessors (valid only for kind() == Box).
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  // Ball accessors (valid only for kind() == Ball).
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  FeasibleSet(SetKind kind, Index dim) : kind_(kind), dim_(dim) {}

  SetKind kind_;
  Index dim_;
  Vector lower_, upper_;  // box
  Vector center_;         // ball
  double radius_ = 0.0;   // ball
};

inline Vector project(const FeasibleSet& set, const Vector& z) {
  return set.project(z);
}

}  // namespace vireg
