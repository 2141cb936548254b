#include "vireg/vi_problem.hpp"

#include <cmath>

#include "vireg/parallel.hpp"
#include "vireg/rex.hpp"

namespace vireg {

const Vector& VIProblem::reference(double tol) const {
  if (reference_solution) return *reference_solution;
  std::lock_guard<std::mutex> lock(lazy_->mutex);
  if (!lazy_->value) {
    if (!(mu > 0.0)) {
      throw ConfigError(name + ": reference pre-solve requires mu > 0");
    }
    lazy_->value = solve_reference(*this, tol);
  }
  return *lazy_->value;
}

ApproximationOracle taylor_oracle(const VIProblem& problem, int p) {
  if (p != 1 && p != 2) {
    throw ConfigError("taylor_oracle: unsupported order " + std::to_string(p) +
                      " (built-in Taylor surrogates cover p in {1, 2})");
  }
  ApproximationOracle oracle;
  oracle.order = p;
  if (p == 1) {
    oracle.label = "taylor-1";
    oracle.tau = 1.0;
    oracle.lp = problem.l1;
    oracle.constant_in_x = true;
    oracle.evaluate = [op = problem.op](const Vector&, const Vector& anchor) {
      return op(anchor);
    };
    oracle.affine_model = [op = problem.op](const Vector& anchor) {
      const Index n = anchor.size();
      return ApproximationOracle::AffineModel{op(anchor), Matrix::Zero(n, n)};
    };
  } else {
    if (!problem.has_jacobian()) {
      throw ConfigError("taylor_oracle: p=2 requires a Jacobian");
    }
    oracle.label = "taylor-2";
    oracle.tau = 0.5;
    oracle.lp = problem.l2;
    oracle.evaluate = [op = problem.op, jac = problem.jacobian](
                          const Vector& x, const Vector& anchor) -> Vector {
      return op(anchor) + jac(anchor) * (x - anchor);
    };
    oracle.affine_model = [op = problem.op, jac = problem.jacobian](
                              const Vector& anchor) {
      return ApproximationOracle::AffineModel{op(anchor), jac(anchor)};
    };
  }
  return oracle;
}

ApproximationOracle composite_split_oracle(const CompositeProblem& problem) {
  ApproximationOracle oracle;
  oracle.label = "composite-split";
  oracle.order = 1;
  oracle.tau = 1.0;
  oracle.lp = problem.l_h;
  oracle.evaluate = [h = problem.h_op, g = problem.g_op](
                        const Vector& x, const Vector& anchor) -> Vector {
    return h(anchor) + g(x);
  };
  return oracle;
}

VIProblem composite_as_vi(const CompositeProblem& problem, double l1,
                          double mu) {
  VIProblem vi;
  vi.name = problem.name;
  vi.set = problem.set;
  vi.dimension = problem.dimension;
  vi.l1 = l1;
  vi.mu = mu;
  vi.op = [h = problem.h_op, g = problem.g_op](const Vector& x) -> Vector {
    return h(x) + g(x);
  };
  if (problem.h_jacobian && problem.g_jacobian) {
    vi.jacobian = [hj = problem.h_jacobian,
                   gj = problem.g_jacobian](const Vector& x) -> Matrix {
      return hj(x) + gj(x);
    };
  }
  return vi;
}

OracleBoundReport verify_oracle_bound(const ApproximationOracle& oracle,
                                      const VIProblem& problem,
                                      const Sampler& sampler, int n_pairs,
                                      const Vector& center, double radius) {
  if (n_pairs < 1) throw ConfigError("verify_oracle_bound: n_pairs >= 1");
  const Index n = n_pairs;
  const Index worst = par::argmax(n, [&](Index i) {
    const Vector x = sampler.in_ball(center, radius, 2 * static_cast<std::uint64_t>(i));
    const Vector y = sampler.in_ball(center, radius, 2 * static_cast<std::uint64_t>(i) + 1);
    const double err = (oracle.evaluate(x, y) - problem.eval(x)).norm();
    return err - oracle.tau * oracle.lp * std::pow((x - y).norm(), oracle.order);
  });

  OracleBoundReport report;
  report.worst_x = sampler.in_ball(center, radius, 2 * static_cast<std::uint64_t>(worst));
  report.worst_y = sampler.in_ball(center, radius, 2 * static_cast<std::uint64_t>(worst) + 1);
  const double err =
      (oracle.evaluate(report.worst_x, report.worst_y) - problem.eval(report.worst_x)).norm();
  const double dist = (report.worst_x - report.worst_y).norm();
  report.max_violation = err - oracle.tau * oracle.lp * std::pow(dist, oracle.order);
  report.empirical_lp = par::max_reduce(n, [&](Index i) {
    const Vector x = sampler.in_ball(center, radius, 2 * static_cast<std::uint64_t>(i));
    const Vector y = sampler.in_ball(center, radius, 2 * static_cast<std::uint64_t>(i) + 1);
    const double d = (x - y).norm();
    if (d == 0.0) return 0.0;
    return (oracle.evaluate(x, y) - problem.eval(x)).norm() /
           (oracle.tau * std::pow(d, oracle.order));
  });
  return report;
}

double monotonicity_probe(const VIProblem& problem, const Sampler& sampler,
                          int n_pairs, const Vector& center, double radius) {
  if (n_pairs < 1) throw ConfigError("monotonicity_probe: n_pairs >= 1");
  return par::min_reduce(n_pairs, [&](Index i) {
    const Vector x = sampler.in_ball(center, radius, 2 * static_cast<std::uint64_t>(i));
    const Vector y = sampler.in_ball(center, radius, 2 * static_cast<std::uint64_t>(i) + 1);
    const double d2 = (x - y).squaredNorm();
    if (d2 == 0.0) return std::numeric_limits<double>::infinity();
    return (problem.eval(x) - problem.eval(y)).dot(x - y) / d2;
  });
}

Matrix finite_difference_jacobian(const OperatorFn& op, const Vector& x,
                                  double h) {
  const Index n = x.size();
  Matrix jac(op(x).size(), n);
  Vector xp = x, xm = x;
  for (Index j = 0; j < n; ++j) {
    const double step = h * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    jac.col(j) = (op(xp) - op(xm)) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

double jacobian_consistency(const VIProblem& problem, const Sampler& sampler,
                            int n_points, const Vector& center, double radius) {
  return par::max_reduce(n_points, [&](Index i) {
    const Vector x = sampler.in_ball(center, radius, static_cast<std::uint64_t>(i));
    const Matrix analytic = problem.eval_jacobian(x);
    const Matrix fd = finite_difference_jacobian(problem.op, x);
    return (analytic - fd).norm() / (1.0 + analytic.norm());
  });
}

double spectral_norm(const Matrix& a, int iters) {
  if (a.size() == 0) return 0.0;
  Vector v = Vector::Ones(a.cols());
  // deterministic non-symmetric start so odd eigenvector structure is hit
  for (Index j = 0; j < v.size(); ++j) v[j] += 1e-3 * static_cast<double>(j % 7);
  v.normalize();
  double norm2 = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = a.transpose() * (a * v);
    norm2 = w.norm();
    if (norm2 == 0.0) return 0.0;
    v = w / norm2;
  }
  return std::sqrt(norm2);
}

}  // namespace vireg
