#pragma once

#include <optional>
#include <string>

#include "vireg/vi_problem.hpp"

namespace vireg {

/// The regularized inner problem solved once per outer iteration:
/// find x in the set with
///   <F~(x; anchor) + reg_m * ||x - anchor||^{p-1} (x - anchor), z - x> >= 0
/// for all feasible z.
struct SubproblemInstance {
  ApproximationOracle oracle;
  Vector anchor;
  double reg_m = 1.0;
  FeasibleSet set = FeasibleSet::whole_space(1);
  int p = 2;
};

enum class SubproblemStrategy { Auto, NewtonLambda, BisectionLambda, SS2, InnerEG };

const char* to_string(SubproblemStrategy s);
std::optional<SubproblemStrategy> parse_strategy(const std::string& name);

struct LambdaSolve {
  Vector x_half;
  double lambda = 0.0;  // reg_m * ||x_half - anchor||^{p-1} at the solution
  int inner_iters = 0;
  double residual = 0.0;  // natural residual of the regularized operator
  bool converged = true;
  std::string note;
};

/// Thrown when an inner solver exhausts its budget; carries the best iterate.
class SubproblemError : public std::runtime_error {
 public:
  SubproblemError(const std::string& what, LambdaSolve best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const LambdaSolve& best() const { return best_; }

 private:
  LambdaSolve best_;
};

struct SolveHints {
  const Vector* warm_x = nullptr;     // previous midpoint
  double warm_lambda = -1.0;          // previous lambda, < 0 when absent
};

/// Evaluates the regularized operator and its natural residual without going
/// through any strategy-specific structure; used for certificates.
Vector regularized_operator(const SubproblemInstance& inst, const Vector& x);
double subproblem_residual(const SubproblemInstance& inst, const Vector& x);

/// Scalar-parameterized solve for the unconstrained linearized instance:
/// x(lambda) = anchor - (J + lambda I)^{-1} c, Newton on
/// f(lambda) = lambda^2 - M^2 ||x(lambda) - anchor||^2 safeguarded by a
/// sign bracket on phi(lambda) = lambda - M ||x(lambda) - anchor||.
LambdaSolve newton_lambda(const SubproblemInstance& inst, double tol,
                          const SolveHints& hints = {});

/// Log-space bisection on the same scalar equation with a linear-VI inner
/// solve per lambda (closed form on the whole space, projected
/// extra-gradient on box/ball/orthant).
LambdaSolve bisection_lambda(const SubproblemInstance& inst, double tol,
                             const SolveHints& hints = {});

/// Inner splitting loop for p=2 linearized instances: each sweep takes an
/// exact cubic-prox step on the split operator followed by a gradient
/// projection correction.
LambdaSolve ss2_loop(const SubproblemInstance& inst, double tol,
                     const SolveHints& hints = {});

/// Maximizer of -(2/3) M tau^{3/2} - g_norm^2 / (4 M tau + 2 l_h) over
/// tau >= 0, by bracketed scalar root finding on the stationarity equation.
double tau_star(double g_norm, double reg_m, double l_h);

/// Extra-gradient on the full regularized operator inside a trust ball
/// around the anchor (intersected with the set); the radius doubles when
/// the solution lands on the trust boundary.
LambdaSolve inner_eg(const SubproblemInstance& inst, double trust_radius,
                     double tol, const SolveHints& hints = {});

/// Strategy dispatch. Constant-in-x surrogates always take the closed-form
/// projection; Auto picks newton_lambda on unconstrained linearized
/// instances and inner_eg otherwise. Throws ConfigError on a
/// strategy/instance mismatch and SubproblemError on budget exhaustion.
LambdaSolve solve_subproblem(const SubproblemInstance& inst,
                             SubproblemStrategy strategy, double tol,
                             const SolveHints& hints = {});

}  // namespace vireg
