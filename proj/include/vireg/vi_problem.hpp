#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "vireg/feasible_set.hpp"
#include "vireg/rng.hpp"

namespace vireg {

using OperatorFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// A variational inequality instance: find x* in the set with
/// <F(x*), x - x*> >= 0 for all feasible x.
///
/// Smoothness constants l1 (of F), l2 (of the Jacobian) and the
/// strong-monotonicity modulus mu are declared by the constructor, not
/// estimated; the probes below report empirical values but are never
/// substituted silently.
///
/// Immutable after construction and shareable across threads. The lazy
/// reference-solution cache is internally synchronized.
struct VIProblem {
  std::string name;
  OperatorFn op;
  JacobianFn jacobian;  // may be empty for first-order-only problems
  FeasibleSet set = FeasibleSet::whole_space(1);
  Index dimension = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double mu = 0.0;
  std::optional<Vector> reference_solution;

  Vector eval(const Vector& x) const {
    check_dimension(dimension, x.size(), "eval_operator");
    return op(x);
  }

  Matrix eval_jacobian(const Vector& x) const {
    check_dimension(dimension, x.size(), "eval_jacobian");
    if (!jacobian) throw ConfigError(name + ": no Jacobian available");
    return jacobian(x);
  }

  bool has_jacobian() const { return static_cast<bool>(jacobian); }

  /// Reference solution for metrics: the declared one if present, else a
  /// high-precision pre-solve (cached, thread-safe). Requires mu > 0.
  const Vector& reference(double tol = 1e-13) const;

 private:
  struct LazyRef {
    std::mutex mutex;
    std::optional<Vector> value;
  };
  std::shared_ptr<LazyRef> lazy_ = std::make_shared<LazyRef>();
};

/// Surrogate operator anchored at y with a declared p-th order error bound:
/// ||evaluate(x, y) - F(x)|| <= tau * lp * ||x - y||^p.
struct ApproximationOracle {
  std::string label;
  /// F~(x; anchor)
  std::function<Vector(const Vector& x, const Vector& anchor)> evaluate;
  int order = 1;
  double tau = 1.0;
  double lp = 0.0;

  /// Present iff evaluate(., anchor) is affine in x: returns
  /// { value = F~(anchor; anchor), jacobian = d/dx F~(x; anchor) }.
  struct AffineModel {
    Vector value;
    Matrix jacobian;
  };
  std::function<AffineModel(const Vector& anchor)> affine_model;

  /// True when evaluate(x, anchor) does not depend on x (order-1 Taylor);
  /// the regularized subproblem then has a closed-form solution.
  bool constant_in_x = false;
};

/// Operator split F = H + G with H Lipschitz-smooth and G monotone.
struct CompositeProblem {
  std::string name;
  OperatorFn h_op;
  JacobianFn h_jacobian;
  double l_h = 0.0;
  OperatorFn g_op;
  JacobianFn g_jacobian;  // optional
  FeasibleSet set = FeasibleSet::whole_space(1);
  Index dimension = 0;

  Vector eval(const Vector& x) const { return h_op(x) + g_op(x); }
};

/// Taylor surrogate of order p in {1, 2}. p=1 freezes F at the anchor
/// (tau = 1 against l1); p=2 linearizes (tau = 1/2 against l2, the
/// integral-remainder constant).
ApproximationOracle taylor_oracle(const VIProblem& problem, int p);

/// Splitting surrogate H(anchor) + G(x) for composite operators; order 1
/// against l_h only, so G may be arbitrarily nonsmooth.
ApproximationOracle composite_split_oracle(const CompositeProblem& problem);

/// VI view of a composite problem (F = H + G), for solvers and metrics.
VIProblem composite_as_vi(const CompositeProblem& problem, double l1,
                          double mu);

struct OracleBoundReport {
  double max_violation = 0.0;  // max of ||F~ - F|| - tau*lp*||x-y||^p
  double empirical_lp = 0.0;   // max of ||F~ - F|| / (tau*||x-y||^p)
  Vector worst_x, worst_y;
};

/// Samples n_pairs (x, y) pairs in a ball around `center` and reports the
/// worst violation of the declared oracle bound. Nonpositive max_violation
/// means the bound held on every sampled pair.
OracleBoundReport verify_oracle_bound(const ApproximationOracle& oracle,
                                      const VIProblem& problem,
                                      const Sampler& sampler, int n_pairs,
                                      const Vector& center, double radius);

/// Min over sampled pairs of <F(x)-F(y), x-y> / ||x-y||^2; an upper
/// estimate of the true strong-monotonicity modulus.
double monotonicity_probe(const VIProblem& problem, const Sampler& sampler,
                          int n_pairs, const Vector& center, double radius);

/// Central finite-difference Jacobian, the independent check for analytic
/// Jacobians.
Matrix finite_difference_jacobian(const OperatorFn& op, const Vector& x,
                                  double h = 1e-6);

/// Max over n_points sampled points of the relative deviation between the
/// analytic and finite-difference Jacobian.
double jacobian_consistency(const VIProblem& problem, const Sampler& sampler,
                            int n_points, const Vector& center, double radius);

/// Spectral norm by power iteration on A^T A with a deterministic start.
double spectral_norm(const Matrix& a, int iters = 20);

}  // namespace vireg
