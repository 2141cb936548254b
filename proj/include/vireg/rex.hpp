#pragma once

#include "vireg/subproblem.hpp"
#include "vireg/trace.hpp"
#include "vireg/vi_problem.hpp"

namespace vireg {

/// Configuration for the regularized extra-gradient family (rex). reg_m is
/// the coefficient of the (p+1)-order regularizer; tau_eff is the oracle
/// error budget relative to reg_m and must stay strictly below 1 so every
/// rate constant remains finite.
struct RexConfig {
  int p = 2;
  double reg_m = 1.0;
  double tau_eff = 0.5;
  double delta = 0.5;        // per-epoch contraction target
  double alpha_local = 0.5;  // direct-step acceptance factor
  double d0 = 0.0;           // initial distance-to-solution estimate
  int max_iters = 1000;
  double tol_residual = 1e-10;
  SubproblemStrategy strategy = SubproblemStrategy::Auto;
  double subproblem_tol = 0.0;  // <= 0: min(1e-10, 0.01 * tol_residual)
  int restart_n = 0;            // > 0 overrides the epoch-length formula

  double effective_subproblem_tol() const {
    return subproblem_tol > 0.0 ? subproblem_tol
                                : std::min(1e-10, 0.01 * tol_residual);
  }
};

/// Default config for an oracle: reg_m = 2 * tau * lp makes tau_eff = 1/2.
/// Oracles with lp = 0 (exact surrogates) need an explicit reg_m.
RexConfig rex_config(const ApproximationOracle& oracle, double reg_m = 0.0);

void validate(const RexConfig& cfg, const ApproximationOracle& oracle);

/// Fixed per-epoch iteration count
///   N = ceil( (M / (2 delta mu))^{2/(p+1)} * (d0^2/(1-tau^2))^{(p-1)/(p+1)} ),
/// at least 1. Requires mu > 0.
int epoch_length(const RexConfig& cfg, double mu);

/// Accept the midpoint directly (skipping the extra-gradient correction)
/// once ||x_half - x_base||^{p-1} <= alpha sqrt(1-tau^2)/(1+tau) * mu/M.
/// Only meaningful for p > 1.
bool local_switch_condition(const Vector& x_half, const Vector& x_base,
                            const RexConfig& cfg, double mu);

struct RexStep {
  Vector x_half;
  Vector x_next;
  double gamma = 0.0;
  double lambda = 0.0;
  int inner_iters = 0;
  /// Set when gamma collapsed below the stationarity floor; x_half is then
  /// returned as the solution and the extra-gradient step is skipped.
  bool stationary = false;
};

/// One two-stage update: solve the regularized subproblem at x_base, then
/// take the extra-gradient correction with step 1/gamma,
/// gamma = reg_m * ||x_half - x_base||^{p-1}.
RexStep rex_step(const VIProblem& problem, const ApproximationOracle& oracle,
                 const Vector& x_base, const RexConfig& cfg,
                 const SolveHints& hints = {});

/// Midpoint-accepting update: the subproblem solution becomes the next
/// iterate and the correction is suppressed.
RexStep direct_step(const VIProblem& problem, const ApproximationOracle& oracle,
                    const Vector& x_base, const RexConfig& cfg,
                    const SolveHints& hints = {});

/// Plain run: averaged iterate tracked across all iterations; the recorded
/// residual is the termination metric of the running average.
ConvergenceTrace run_rex(const VIProblem& problem,
                         const ApproximationOracle& oracle,
                         const RexConfig& cfg, const Vector& x_init);

/// Restarted run: fixed-length epochs, each re-seeded from the previous
/// epoch's weighted average. Requires mu > 0.
ConvergenceTrace run_rex_restart(const VIProblem& problem,
                                 const ApproximationOracle& oracle,
                                 const RexConfig& cfg, const Vector& x_init);

/// Restarted run with local switching: midpoints are accepted directly once
/// the local condition holds, giving p-th order convergence near the
/// solution. Requires mu > 0 and p > 1.
ConvergenceTrace run_rex_local(const VIProblem& problem,
                               const ApproximationOracle& oracle,
                               const RexConfig& cfg, const Vector& x_init);

/// High-precision pre-solve used for cached reference solutions.
Vector solve_reference(const VIProblem& problem, double tol = 1e-13);

}  // namespace vireg
