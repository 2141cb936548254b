#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vireg/common.hpp"

namespace vireg {

enum class StepKind { Extra, Direct, FirstOrder };
enum class RunStatus { Converged, IterLimit, Diverged, Failed };

const char* to_string(StepKind kind);
const char* to_string(RunStatus status);

struct StepRecord {
  int k = 0;      // 1-based outer iteration
  int epoch = 1;  // 1-based restart epoch
  Vector x_base;  // iterate the step started from
  Vector x_half;  // subproblem midpoint (EG midpoint for first-order extra steps)
  Vector x;       // iterate after the step
  double gamma = 0.0;
  StepKind kind = StepKind::FirstOrder;
  double residual = 0.0;
  int inner_iters = 0;
  std::int64_t wall_ns = 0;  // cumulative since run start
};

/// Per-run convergence record shared by every solver. For solvers with
/// restart, averaged_iterate and gamma_sum describe the final epoch.
struct ConvergenceTrace {
  std::string method;
  std::vector<StepRecord> records;
  std::optional<Vector> averaged_iterate;
  double gamma_sum = 0.0;
  RunStatus status = RunStatus::IterLimit;
  std::string message;

  int iterations() const { return static_cast<int>(records.size()); }
  double final_residual() const {
    return records.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : records.back().residual;
  }
  /// First 1-based iteration whose residual is <= tol, or nullopt.
  std::optional<int> iterations_to(double tol) const;
};

struct TraceCsvOptions {
  /// Zero the wall_ns column so repeated runs are byte-identical
  /// (used by the benchmark harness; totals go to the manifest instead).
  bool zero_wall = false;
};

/// CSV schema: k,epoch,method,step_kind,residual,gamma_k,inner_iters,wall_ns.
/// Floats are written as shortest round-trip decimals.
void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace,
                     const TraceCsvOptions& options = {});
void write_trace_csv(const std::string& path, const ConvergenceTrace& trace,
                     const TraceCsvOptions& options = {});

/// Shortest decimal that parses back to exactly the same double.
std::string format_double(double v);

/// Structural invariants every trace must satisfy: gamma consistency
/// (gamma_k = reg_m * ||x_half - x||^{p-1} on regularized records) and the
/// weighted-average identity over the final epoch. Throws on violation.
void verify_trace(const ConvergenceTrace& trace, double reg_m, int p,
                  double rel_tol = 1e-12);

}  // namespace vireg
