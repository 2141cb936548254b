#include "vireg/rex.hpp"

#include <chrono>
#include <cmath>

#include "vireg/metrics.hpp"

namespace vireg {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() -
                                                              start)
      .count();
}

bool diverged(double residual) {
  return !std::isfinite(residual) || residual > 1e12;
}

/// Weighted midpoint average accumulated over one epoch.
struct EpochAverage {
  Vector weighted;
  double gamma_sum = 0.0;

  void reset(Index dim) {
    weighted = Vector::Zero(dim);
    gamma_sum = 0.0;
  }
  void add(const Vector& x_half, double gamma) {
    weighted += x_half / gamma;
    gamma_sum += 1.0 / gamma;
  }
  bool empty() const { return gamma_sum == 0.0; }
  Vector value() const { return weighted / gamma_sum; }
};

}  // namespace

RexConfig rex_config(const ApproximationOracle& oracle, double reg_m) {
  RexConfig cfg;
  cfg.p = oracle.order;
  if (reg_m > 0.0) {
    cfg.reg_m = reg_m;
  } else {
    if (!(oracle.tau * oracle.lp > 0.0)) {
      throw ConfigError(
          "rex_config: oracle has tau*lp = 0 (exact surrogate); pass reg_m "
          "explicitly");
    }
    cfg.reg_m = 2.0 * oracle.tau * oracle.lp;
  }
  cfg.tau_eff = oracle.tau * oracle.lp / cfg.reg_m;
  validate(cfg, oracle);
  return cfg;
}

void validate(const RexConfig& cfg, const ApproximationOracle& oracle) {
  if (cfg.p < 1) throw ConfigError("rex: p must be >= 1");
  if (!(cfg.reg_m > 0.0)) throw ConfigError("rex: reg_m must be positive");
  if (!(cfg.tau_eff >= 0.0 && cfg.tau_eff < 1.0)) {
    throw ConfigError("rex: tau_eff must lie in [0, 1)");
  }
  if (cfg.reg_m * cfg.tau_eff + 1e-12 * cfg.reg_m < oracle.tau * oracle.lp) {
    throw ConfigError("rex: reg_m too small for the oracle bound (need "
                      "reg_m >= tau * lp / tau_eff)");
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw ConfigError("rex: delta must lie in (0, 1)");
  }
  if (!(cfg.alpha_local > 0.0 && cfg.alpha_local < 1.0)) {
    throw ConfigError("rex: alpha_local must lie in (0, 1)");
  }
}

int epoch_length(const RexConfig& cfg, double mu) {
  if (!(mu > 0.0)) {
    throw ConfigError("epoch_length: restart requires strong monotonicity");
  }
  if (!(cfg.d0 > 0.0)) throw ConfigError("epoch_length: d0 must be positive");
  const double p = cfg.p;
  const double one_minus_tau2 = 1.0 - cfg.tau_eff * cfg.tau_eff;
  const double a = std::pow(cfg.reg_m / (2.0 * cfg.delta * mu), 2.0 / (p + 1.0));
  const double b =
      std::pow(cfg.d0 * cfg.d0 / one_minus_tau2, (p - 1.0) / (p + 1.0));
  const double n = std::ceil(a * b);
  if (!(n >= 1.0)) return 1;
  if (n > 1e9) throw ConfigError("epoch_length: formula gives N > 1e9");
  return static_cast<int>(n);
}

bool local_switch_condition(const Vector& x_half, const Vector& x_base,
                            const RexConfig& cfg, double mu) {
  if (cfg.p <= 1) {
    throw ConfigError("local_switch_condition: requires p > 1");
  }
  if (!(mu > 0.0)) {
    throw ConfigError("local_switch_condition: requires mu > 0");
  }
  const double tau = cfg.tau_eff;
  const double threshold = cfg.alpha_local * std::sqrt(1.0 - tau * tau) /
                           (1.0 + tau) * mu / cfg.reg_m;
  const double lhs = std::pow((x_half - x_base).norm(), cfg.p - 1);
  return lhs <= threshold;
}

RexStep rex_step(const VIProblem& problem, const ApproximationOracle& oracle,
                 const Vector& x_base, const RexConfig& cfg,
                 const SolveHints& hints) {
  SubproblemInstance inst{oracle, x_base, cfg.reg_m, problem.set, cfg.p};
  LambdaSolve sub = solve_subproblem(inst, cfg.strategy,
                                     cfg.effective_subproblem_tol(), hints);
  RexStep out;
  const double r = (sub.x_half - x_base).norm();
  out.gamma = cfg.p == 1 ? cfg.reg_m : cfg.reg_m * std::pow(r, cfg.p - 1);
  out.lambda = sub.lambda;
  out.inner_iters = sub.inner_iters;
  const double floor = 1e-14 * std::pow(1.0 + x_base.norm(), cfg.p - 1);
  if (cfg.p > 1 && out.gamma < floor) {
    out.stationary = true;
    out.x_next = sub.x_half;
    out.x_half = std::move(sub.x_half);
    return out;
  }
  out.x_next = problem.set.project(x_base - problem.eval(sub.x_half) / out.gamma);
  out.x_half = std::move(sub.x_half);
  return out;
}

RexStep direct_step(const VIProblem& problem, const ApproximationOracle& oracle,
                    const Vector& x_base, const RexConfig& cfg,
                    const SolveHints& hints) {
  SubproblemInstance inst{oracle, x_base, cfg.reg_m, problem.set, cfg.p};
  LambdaSolve sub = solve_subproblem(inst, cfg.strategy,
                                     cfg.effective_subproblem_tol(), hints);
  RexStep out;
  const double r = (sub.x_half - x_base).norm();
  out.gamma = cfg.p == 1 ? cfg.reg_m : cfg.reg_m * std::pow(r, cfg.p - 1);
  out.lambda = sub.lambda;
  out.inner_iters = sub.inner_iters;
  out.x_next = sub.x_half;
  out.x_half = std::move(sub.x_half);
  return out;
}

namespace {

void require_feasible(const VIProblem& problem, const Vector& x_init) {
  check_dimension(problem.dimension, x_init.size(), "x_init");
  if (!problem.set.contains(x_init, 1e-9)) {
    throw ConfigError("x_init is not feasible");
  }
}

/// Shared epoch loop; `use_local_switch` enables the direct-step branch.
ConvergenceTrace run_epochs(const VIProblem& problem,
                            const ApproximationOracle& oracle,
                            const RexConfig& cfg, const Vector& x_init,
                            bool restart, bool use_local_switch,
                            const char* method) {
  validate(cfg, oracle);
  require_feasible(problem, x_init);

  RexConfig run_cfg = cfg;
  int n_epoch = 0;  // 0: no restart
  if (restart) {
    if (run_cfg.d0 <= 0.0) {
      if (const auto diam = problem.set.diameter()) {
        run_cfg.d0 = x_init.norm() + 0.5 * *diam;
      } else {
        throw ConfigError(
            "restart on an unbounded set requires an explicit d0");
      }
    }
    n_epoch = run_cfg.restart_n > 0 ? run_cfg.restart_n
                                    : epoch_length(run_cfg, problem.mu);
  }
  if (use_local_switch && run_cfg.p <= 1) {
    throw ConfigError("local switching requires p > 1");
  }

  ConvergenceTrace trace;
  trace.method = method;
  const auto start = Clock::now();

  Vector x = x_init;
  EpochAverage avg;
  avg.reset(problem.dimension);
  int epoch = 1;
  int epoch_steps = 0;
  Vector last_half;
  double last_lambda = -1.0;

  for (int k = 1; k <= run_cfg.max_iters; ++k) {
    SolveHints hints;
    if (last_half.size() > 0) {
      hints.warm_x = &last_half;
      hints.warm_lambda = last_lambda;
    }

    StepRecord rec;
    rec.k = k;
    rec.epoch = epoch;
    rec.x_base = x;

    RexStep step;
    try {
      step = rex_step(problem, oracle, x, run_cfg, hints);
    } catch (const SubproblemError& e) {
      trace.status = RunStatus::Failed;
      trace.message = e.what();
      break;
    }
    last_half = step.x_half;
    last_lambda = step.lambda;
    ++epoch_steps;

    bool accept_direct = step.stationary;
    if (!accept_direct && use_local_switch &&
        local_switch_condition(step.x_half, x, run_cfg, problem.mu)) {
      accept_direct = true;
      step.x_next = step.x_half;
    }

    if (accept_direct) {
      rec.kind = StepKind::Direct;
      rec.residual = termination_residual(problem, step.x_next);
    } else {
      rec.kind = StepKind::Extra;
      avg.add(step.x_half, step.gamma);
      rec.residual = termination_residual(problem, avg.value());
      if (use_local_switch) {
        // iterate-based metric: the local phase tracks the iterate itself
        rec.residual = termination_residual(problem, step.x_next);
      }
    }
    rec.x_half = step.x_half;
    rec.x = step.x_next;
    rec.gamma = step.gamma;
    rec.inner_iters = step.inner_iters;
    rec.wall_ns = elapsed_ns(start);
    trace.records.push_back(std::move(rec));

    x = step.x_next;
    const double res = trace.records.back().residual;
    if (step.stationary || res <= run_cfg.tol_residual) {
      trace.status = RunStatus::Converged;
      break;
    }
    if (diverged(res)) {
      trace.status = RunStatus::Diverged;
      trace.message = "residual exceeded divergence threshold";
      break;
    }

    if (restart && rec.kind == StepKind::Extra && epoch_steps >= n_epoch &&
        !avg.empty()) {
      x = avg.value();
      avg.reset(problem.dimension);
      ++epoch;
      epoch_steps = 0;
      last_half.resize(0);
      last_lambda = -1.0;
    }
  }

  if (!avg.empty()) {
    trace.averaged_iterate = avg.value();
    trace.gamma_sum = avg.gamma_sum;
  } else if (!trace.records.empty()) {
    trace.averaged_iterate = trace.records.back().x;
    trace.gamma_sum = 0.0;
  }
  return trace;
}

}  // namespace

ConvergenceTrace run_rex(const VIProblem& problem,
                         const ApproximationOracle& oracle,
                         const RexConfig& cfg, const Vector& x_init) {
  return run_epochs(problem, oracle, cfg, x_init, /*restart=*/false,
                    /*use_local_switch=*/false, "rex");
}

ConvergenceTrace run_rex_restart(const VIProblem& problem,
                                 const ApproximationOracle& oracle,
                                 const RexConfig& cfg, const Vector& x_init) {
  if (!(problem.mu > 0.0)) {
    throw ConfigError("run_rex_restart: requires a strongly monotone problem");
  }
  return run_epochs(problem, oracle, cfg, x_init, /*restart=*/true,
                    /*use_local_switch=*/false, "rex-restart");
}

ConvergenceTrace run_rex_local(const VIProblem& problem,
                               const ApproximationOracle& oracle,
                               const RexConfig& cfg, const Vector& x_init) {
  if (!(problem.mu > 0.0)) {
    throw ConfigError("run_rex_local: requires a strongly monotone problem");
  }
  return run_epochs(problem, oracle, cfg, x_init, /*restart=*/true,
                    /*use_local_switch=*/true, "rex-local");
}

Vector solve_reference(const VIProblem& problem, double tol) {
  if (!(problem.mu > 0.0)) {
    throw ConfigError("solve_reference: requires mu > 0");
  }
  if (!problem.has_jacobian()) {
    throw ConfigError("solve_reference: requires a Jacobian");
  }
  const ApproximationOracle oracle = taylor_oracle(problem, 2);
  RexConfig cfg;
  if (oracle.tau * oracle.lp > 0.0) {
    cfg = rex_config(oracle);
  } else {
    cfg = rex_config(oracle, std::max(problem.mu, 1e-6));
  }
  cfg.tol_residual = tol;
  cfg.subproblem_tol = std::min(1e-12, 0.01 * tol);
  cfg.max_iters = 200000;

  const Vector x0 = problem.set.project(Vector::Zero(problem.dimension));
  cfg.d0 = residual_norm(problem, x0) / problem.mu + 1e-12;
  ConvergenceTrace trace = run_rex_local(problem, oracle, cfg, x0);
  if (trace.records.empty()) return x0;
  const Vector& x_star = trace.records.back().x;
  if (termination_residual(problem, x_star) > 10.0 * tol) {
    throw std::runtime_error(problem.name +
                             ": reference pre-solve did not reach tolerance");
  }
  return x_star;
}

}  // namespace vireg
