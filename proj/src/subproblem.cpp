#include "vireg/subproblem.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace vireg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double reg_coefficient(int p, double reg_m, double r) {
  return p == 1 ? reg_m : reg_m * std::pow(r, p - 1);
}

/// Regularized operator with the surrogate's affine structure captured once
/// per instance, so inner loops never re-evaluate problem Jacobians.
struct RegOperator {
  const SubproblemInstance& inst;
  std::optional<ApproximationOracle::AffineModel> model;

  explicit RegOperator(const SubproblemInstance& i) : inst(i) {
    if (inst.oracle.affine_model) {
      model = inst.oracle.affine_model(inst.anchor);
    }
  }

  Vector surrogate(const Vector& x) const {
    if (model) return model->value + model->jacobian * (x - inst.anchor);
    return inst.oracle.evaluate(x, inst.anchor);
  }

  Vector eval(const Vector& x) const {
    const Vector w = x - inst.anchor;
    return surrogate(x) + reg_coefficient(inst.p, inst.reg_m, w.norm()) * w;
  }

  double natural_residual(const Vector& x) const {
    return (x - inst.set.project(x - eval(x))).norm();
  }
};

/// Projection onto the trust ball intersected with the set, by a fixed
/// number of alternating projections. The final projection is onto the set
/// so feasibility is exact; trust membership is allowed to be slightly
/// loose.
Vector project_trust(const FeasibleSet& set, const Vector& anchor, double radius,
                     Vector z) {
  auto ball = [&](Vector v) {
    const Vector d = v - anchor;
    const double nrm = d.norm();
    if (nrm <= radius) return v;
    return Vector(anchor + (radius / nrm) * d);
  };
  if (set.kind() == SetKind::WholeSpace) return ball(std::move(z));
  for (int round = 0; round < 12; ++round) {
    z = set.project(ball(std::move(z)));
  }
  return z;
}

/// Exact minimizer over the set of
///   (M/3) ||x - anchor||^3 + (l_h/2) ||x - anchor||^2 + g^T (x - anchor).
/// Unconstrained the radius solves M r^2 + l_h r = ||g||; constrained, the
/// coupled scalar equation 2 tau = ||z(tau) - anchor|| is bisected with
/// z(tau) = P(anchor - g / (2 M tau + l_h)).
Vector cubic_prox(const FeasibleSet& set, const Vector& anchor, double reg_m,
                  double l_h, const Vector& g) {
  const double gn = g.norm();
  if (gn == 0.0) return anchor;
  const double r_unc = (-l_h + std::sqrt(l_h * l_h + 4.0 * reg_m * gn)) / (2.0 * reg_m);
  if (set.kind() == SetKind::WholeSpace) {
    return anchor - g / (reg_m * r_unc + l_h);
  }
  auto z_at = [&](double tau) {
    return set.project(anchor - g / (2.0 * reg_m * tau + l_h == 0.0 && tau == 0.0
                                         ? std::numeric_limits<double>::min()
                                         : 2.0 * reg_m * tau + l_h));
  };
  double lo = 0.0, hi = 0.5 * r_unc;
  // psi(tau) = 2 tau - ||z(tau) - anchor|| is increasing with psi(hi) >= 0.
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double psi = 2.0 * mid - (z_at(mid) - anchor).norm();
    (psi < 0.0 ? lo : hi) = mid;
  }
  return z_at(0.5 * (lo + hi));
}

/// Linear VI over the set for the operator c + (J + lambda I)(x - anchor):
/// closed form on the whole space, projected extra-gradient otherwise.
struct LinearVISolver {
  const Matrix& jac;
  const Vector& base;  // c
  const Vector& anchor;
  const FeasibleSet& set;
  double jac_norm;

  Vector apply(double lambda, const Vector& x) const {
    const Vector w = x - anchor;
    return base + jac * w + lambda * w;
  }

  Vector solve(double lambda, double tol, Vector warm, int& iters) const {
    const Index n = anchor.size();
    if (set.kind() == SetKind::WholeSpace) {
      Eigen::PartialPivLU<Matrix> lu(jac + lambda * Matrix::Identity(n, n));
      ++iters;
      return anchor - lu.solve(base);
    }
    const double gamma = 2.0 * (jac_norm + lambda);
    Vector x = set.project(std::move(warm));
    for (int it = 0; it < 500000; ++it) {
      const Vector g = apply(lambda, x);
      if ((x - set.project(x - g)).norm() <= tol) break;
      const Vector xh = set.project(x - g / gamma);
      x = set.project(x - apply(lambda, xh) / gamma);
      ++iters;
    }
    return x;
  }
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

LambdaSolve finish(const SubproblemInstance& inst, Vector x_half, int iters,
                   std::string note = {}) {
  LambdaSolve out;
  out.residual = subproblem_residual(inst, x_half);
  out.lambda = reg_coefficient(inst.p, inst.reg_m, (x_half - inst.anchor).norm());
  if (inst.p == 1) out.lambda = inst.reg_m;
  out.x_half = std::move(x_half);
  out.inner_iters = iters;
  out.note = std::move(note);
  return out;
}

/// Closed-form solve for surrogates that do not depend on x (p=1 projection
/// step; p=2 cubic prox).
LambdaSolve solve_constant(const SubproblemInstance& inst) {
  const Vector c = inst.oracle.evaluate(inst.anchor, inst.anchor);
  Vector x;
  if (inst.p == 1) {
    x = inst.set.project(inst.anchor - c / inst.reg_m);
  } else if (inst.p == 2) {
    x = cubic_prox(inst.set, inst.anchor, inst.reg_m, 0.0, c);
  } else {
    throw ConfigError("constant surrogate: closed form covers p in {1, 2}");
  }
  LambdaSolve out = finish(inst, std::move(x), 1);
  const double r = (out.x_half - inst.anchor).norm();
  out.lambda = reg_coefficient(inst.p, inst.reg_m, r);
  return out;
}

}  // namespace

const char* to_string(SubproblemStrategy s) {
  switch (s) {
    case SubproblemStrategy::Auto: return "auto";
    case SubproblemStrategy::NewtonLambda: return "newton-lambda";
    case SubproblemStrategy::BisectionLambda: return "bisection-lambda";
    case SubproblemStrategy::SS2: return "ss2";
    case SubproblemStrategy::InnerEG: return "inner-eg";
  }
  return "?";
}

std::optional<SubproblemStrategy> parse_strategy(const std::string& name) {
  if (name == "auto") return SubproblemStrategy::Auto;
  if (name == "newton-lambda") return SubproblemStrategy::NewtonLambda;
  if (name == "bisection-lambda") return SubproblemStrategy::BisectionLambda;
  if (name == "ss2") return SubproblemStrategy::SS2;
  if (name == "inner-eg") return SubproblemStrategy::InnerEG;
  return std::nullopt;
}

Vector regularized_operator(const SubproblemInstance& inst, const Vector& x) {
  const Vector w = x - inst.anchor;
  return inst.oracle.evaluate(x, inst.anchor) +
         reg_coefficient(inst.p, inst.reg_m, w.norm()) * w;
}

double subproblem_residual(const SubproblemInstance& inst, const Vector& x) {
  return (x - inst.set.project(x - regularized_operator(inst, x))).norm();
}

LambdaSolve newton_lambda(const SubproblemInstance& inst, double tol,
                          const SolveHints& hints) {
  require(inst.set.kind() == SetKind::WholeSpace,
          "newton-lambda: requires an unconstrained instance");
  require(static_cast<bool>(inst.oracle.affine_model) && inst.p == 2,
          "newton-lambda: requires a p=2 linearized surrogate");
  tol = std::max(tol, 1e-15);

  const auto model = inst.oracle.affine_model(inst.anchor);
  const Vector& c = model.value;
  const Matrix& jac = model.jacobian;
  const double reg_m = inst.reg_m;
  const Index n = inst.anchor.size();

  if (c.norm() == 0.0) {
    LambdaSolve out = finish(inst, inst.anchor, 0);
    out.lambda = 0.0;
    return out;
  }

  struct Eval {
    double r = kInf;
    Vector w;
    Eigen::PartialPivLU<Matrix> lu;
  };
  auto eval_at = [&](double lam) {
    Eval e;
    e.lu = Eigen::PartialPivLU<Matrix>(jac + lam * Matrix::Identity(n, n));
    e.w = -e.lu.solve(c);
    e.r = e.w.norm();
    return e;
  };

  double lam = hints.warm_lambda > 0.0 ? hints.warm_lambda
                                       : std::sqrt(reg_m * c.norm());
  lam = std::max(lam, 1e-14);
  double lo = 0.0;  // phi(0) <= 0 holds by construction, never evaluated
  double hi = kInf;
  Eval ev = eval_at(lam);

  for (int it = 1; it <= 200; ++it) {
    if (std::isfinite(ev.r)) {
      const double phi = lam - reg_m * ev.r;
      if (std::abs(phi) <= tol && std::abs(phi) * ev.r <= tol) {
        LambdaSolve out = finish(inst, inst.anchor + ev.w, it);
        out.lambda = lam;
        return out;
      }
      (phi > 0.0 ? hi : lo) = lam;
      const double fval = lam * lam - reg_m * reg_m * ev.r * ev.r;
      const double fprime =
          2.0 * lam + 2.0 * reg_m * reg_m * ev.w.dot(ev.lu.solve(ev.w));
      double next = lam - fval / fprime;
      if (!(fprime > 0.0) || !std::isfinite(next) || next <= lo ||
          (hi < kInf && next >= hi)) {
        next = hi < kInf ? 0.5 * (lo + hi) : 4.0 * lam;
      }
      lam = next;
    } else {
      // near-singular solve; treat as phi < 0 and move up
      lo = lam;
      lam = hi < kInf ? 0.5 * (lo + hi) : 4.0 * std::max(lam, 1e-14);
    }
    ev = eval_at(lam);
  }
  LambdaSolve best = finish(inst, inst.anchor + ev.w, 200);
  best.lambda = lam;
  best.converged = false;
  throw SubproblemError("newton-lambda: no convergence within budget", best);
}

LambdaSolve bisection_lambda(const SubproblemInstance& inst, double tol,
                             const SolveHints& hints) {
  require(static_cast<bool>(inst.oracle.affine_model) && inst.p == 2,
          "bisection-lambda: requires a p=2 linearized surrogate");
  tol = std::max(tol, 1e-15);

  const auto model = inst.oracle.affine_model(inst.anchor);
  const Vector& c = model.value;
  const Matrix& jac = model.jacobian;
  const double reg_m = inst.reg_m;
  const double inner_tol = 0.25 * tol;

  if (c.norm() == 0.0) {
    LambdaSolve out = finish(inst, inst.anchor, 0);
    out.lambda = 0.0;
    return out;
  }

  LinearVISolver lin{jac, c, inst.anchor, inst.set, spectral_norm(jac, 50)};
  int iters = 0;
  Vector x = hints.warm_x ? *hints.warm_x : inst.anchor;

  auto accept = [&](double lam, const Vector& sol) {
    const double r = (sol - inst.anchor).norm();
    const bool interval = 0.5 * reg_m * r <= lam + tol && lam <= 2.0 * reg_m * r + tol;
    return interval && subproblem_residual(inst, sol) <= tol;
  };

  double lo = std::max(tol, 1e-14);
  x = lin.solve(lo, inner_tol, std::move(x), iters);
  if (lo - reg_m * (x - inst.anchor).norm() >= 0.0) {
    // the anchor is already a near-solution; lambda* sits below tol
    LambdaSolve out = finish(inst, x, iters);
    out.lambda = lo;
    return out;
  }

  double hi;
  Vector x_hi = x;
  if (hints.warm_lambda > 0.0) {
    hi = hints.warm_lambda;
  } else {
    hi = reg_m * std::max((x - inst.anchor).norm(), 1.0);
  }
  bool bracketed = false;
  for (int expand = 0; expand < 50; ++expand) {
    x_hi = lin.solve(hi, inner_tol, x_hi, iters);
    if (hi - reg_m * (x_hi - inst.anchor).norm() >= 0.0) {
      bracketed = true;
      break;
    }
    lo = hi;
    hi *= 10.0;
  }
  if (!bracketed) {
    LambdaSolve best = finish(inst, x_hi, iters);
    best.lambda = hi;
    best.converged = false;
    throw SubproblemError("bisection-lambda: no sign bracket after expansion",
                          best);
  }
  if (accept(hi, x_hi)) {
    LambdaSolve out = finish(inst, x_hi, iters);
    out.lambda = hi;
    return out;
  }

  Vector x_mid = x_hi;
  for (int it = 0; it < 300; ++it) {
    const double lam = std::sqrt(lo * hi);
    x_mid = lin.solve(lam, inner_tol, x_mid, iters);
    if (accept(lam, x_mid)) {
      LambdaSolve out = finish(inst, x_mid, iters);
      out.lambda = lam;
      return out;
    }
    const double phi = lam - reg_m * (x_mid - inst.anchor).norm();
    (phi > 0.0 ? hi : lo) = lam;
    if (hi - lo <= 1e-16 * hi) break;
  }
  LambdaSolve best = finish(inst, x_mid, iters);
  best.converged = false;
  throw SubproblemError("bisection-lambda: no convergence within budget", best);
}

LambdaSolve ss2_loop(const SubproblemInstance& inst, double tol,
                     const SolveHints& hints) {
  require(static_cast<bool>(inst.oracle.affine_model) && inst.p == 2,
          "ss2: requires a p=2 linearized surrogate");
  tol = std::max(tol, 1e-15);

  const auto model = inst.oracle.affine_model(inst.anchor);
  const Vector& c = model.value;
  const Matrix& jac = model.jacobian;
  const double reg_m = inst.reg_m;
  const double l_h = std::max(spectral_norm(jac, 20), 1e-12);

  std::string note;
  {
    const Matrix sym = 0.5 * (jac + jac.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      note = "inner linear rate not guaranteed (split operator not strongly monotone)";
    }
  }

  RegOperator reg(inst);
  Vector x_bar = hints.warm_x ? inst.set.project(*hints.warm_x) : inst.anchor;
  Vector z = x_bar;
  for (int t = 1; t <= 200000; ++t) {
    const Vector g = c + (jac * (x_bar - inst.anchor)) - l_h * (x_bar - inst.anchor);
    z = cubic_prox(inst.set, inst.anchor, reg_m, l_h, g);
    if (reg.natural_residual(z) <= tol) {
      return finish(inst, std::move(z), t, note);
    }
    x_bar = inst.set.project(x_bar - reg.eval(z) / l_h);
  }
  LambdaSolve best = finish(inst, std::move(z), 200000, note);
  best.converged = false;
  throw SubproblemError("ss2: no convergence within budget", best);
}

double tau_star(double g_norm, double reg_m, double l_h) {
  if (g_norm == 0.0) return 0.0;
  // stationarity of the concave objective:
  // sqrt(tau) * (4 M tau + 2 l_h)^2 = 4 g_norm^2
  auto lhs = [&](double tau) {
    const double q = 4.0 * reg_m * tau + 2.0 * l_h;
    return std::sqrt(tau) * q * q;
  };
  const double rhs = 4.0 * g_norm * g_norm;
  double hi = 1.0;
  for (int it = 0; it < 400 && lhs(hi) < rhs; ++it) hi *= 4.0;
  double lo = 0.0;
  for (int it = 0; it < 500 && hi - lo > 1e-17 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (lhs(mid) < rhs ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

LambdaSolve inner_eg(const SubproblemInstance& inst, double trust_radius,
                     double tol, const SolveHints& hints) {
  tol = std::max(tol, 1e-15);
  RegOperator reg(inst);

  const Vector f0 = reg.surrogate(inst.anchor);
  if (subproblem_residual(inst, inst.anchor) <= tol) {
    return finish(inst, inst.anchor, 0);
  }
  double radius = trust_radius > 0.0
                      ? trust_radius
                      : std::pow(f0.norm() / inst.reg_m, 1.0 / inst.p);
  radius = std::max(radius, 1e-8);

  // Lipschitz scale of the surrogate over the trust ball.
  double l_sur;
  if (reg.model) {
    l_sur = spectral_norm(reg.model->jacobian, 30);
  } else {
    const Sampler sampler(0x5EEDBA11u);
    l_sur = 0.0;
    for (int i = 0; i < 16; ++i) {
      const Vector a = sampler.in_ball(inst.anchor, radius, 2 * i);
      const Vector b = sampler.in_ball(inst.anchor, radius, 2 * i + 1);
      const double d = (a - b).norm();
      if (d > 0.0) {
        l_sur = std::max(l_sur, (reg.surrogate(a) - reg.surrogate(b)).norm() / d);
      }
    }
    l_sur *= 2.0;
  }

  Vector x = hints.warm_x ? *hints.warm_x : inst.anchor;
  int total = 0;
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double lip =
        std::max(l_sur + inst.p * inst.reg_m * std::pow(radius, inst.p - 1), 1e-12);
    const double gamma = 2.0 * lip;
    x = project_trust(inst.set, inst.anchor, radius, std::move(x));
    bool boundary_limited = false;
    for (int it = 0; it < 200000; ++it) {
      const Vector g = reg.eval(x);
      if ((x - inst.set.project(x - g)).norm() <= tol) {
        return finish(inst, std::move(x), total);
      }
      // converged within the trust region but pinned to its boundary:
      // enlarge and retry
      const Vector step = project_trust(inst.set, inst.anchor, radius, x - g / gamma);
      if ((x - step).norm() <= 0.05 * tol &&
          (x - inst.anchor).norm() >= 0.98 * radius) {
        boundary_limited = true;
        break;
      }
      const Vector g_half = reg.eval(step);
      x = project_trust(inst.set, inst.anchor, radius, x - g_half / gamma);
      ++total;
    }
    if (boundary_limited) {
      radius *= 2.0;
      continue;
    }
    break;
  }
  LambdaSolve best = finish(inst, std::move(x), total);
  best.converged = false;
  throw SubproblemError("inner-eg: no convergence within budget", best);
}

LambdaSolve solve_subproblem(const SubproblemInstance& inst,
                             SubproblemStrategy strategy, double tol,
                             const SolveHints& hints) {
  check_dimension(inst.set.dimension(), inst.anchor.size(), "subproblem anchor");
  if (!(inst.reg_m > 0.0)) throw ConfigError("subproblem: reg_m must be positive");

  if (inst.oracle.constant_in_x) return solve_constant(inst);

  switch (strategy) {
    case SubproblemStrategy::NewtonLambda:
      return newton_lambda(inst, tol, hints);
    case SubproblemStrategy::BisectionLambda:
      return bisection_lambda(inst, tol, hints);
    case SubproblemStrategy::SS2:
      return ss2_loop(inst, tol, hints);
    case SubproblemStrategy::InnerEG:
      return inner_eg(inst, 0.0, tol, hints);
    case SubproblemStrategy::Auto:
      if (inst.oracle.affine_model && inst.p == 2 &&
          inst.set.kind() == SetKind::WholeSpace) {
        return newton_lambda(inst, tol, hints);
      }
      return inner_eg(inst, 0.0, tol, hints);
  }
  throw ConfigError("unknown subproblem strategy");
}

}  // namespace vireg
