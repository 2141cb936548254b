#include "vireg/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace vireg {

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Extra: return "extra";
    case StepKind::Direct: return "direct";
    case StepKind::FirstOrder: return "first-order";
  }
  return "?";
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::IterLimit: return "iter-limit";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Failed: return "failed";
  }
  return "?";
}

std::optional<int> ConvergenceTrace::iterations_to(double tol) const {
  for (const StepRecord& r : records) {
    if (r.residual <= tol) return r.k;
  }
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace,
                     const TraceCsvOptions& options) {
  out << "k,epoch,method,step_kind,residual,gamma_k,inner_iters,wall_ns\n";
  for (const StepRecord& r : trace.records) {
    out << r.k << ',' << r.epoch << ',' << trace.method << ','
        << to_string(r.kind) << ',' << format_double(r.residual) << ','
        << format_double(r.gamma) << ',' << r.inner_iters << ','
        << (options.zero_wall ? 0 : r.wall_ns) << '\n';
  }
}

void write_trace_csv(const std::string& path, const ConvergenceTrace& trace,
                     const TraceCsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_trace_csv(out, trace, options);
}

void verify_trace(const ConvergenceTrace& trace, double reg_m, int p,
                  double rel_tol) {
  int last_epoch = trace.records.empty() ? 1 : trace.records.back().epoch;
  double gamma_sum = 0.0;
  Vector weighted;
  int prev_k = 0;
  for (const StepRecord& r : trace.records) {
    if (r.k <= prev_k) throw std::runtime_error("trace: k not increasing");
    prev_k = r.k;
    if (r.kind == StepKind::FirstOrder) continue;
    const double expected =
        p == 1 ? reg_m : reg_m * std::pow((r.x_half - r.x_base).norm(), p - 1);
    if (std::abs(r.gamma - expected) > rel_tol * (1.0 + std::abs(expected))) {
      throw std::runtime_error("trace: gamma inconsistent at k=" +
                               std::to_string(r.k));
    }
    if (r.kind == StepKind::Extra && r.epoch == last_epoch) {
      gamma_sum += 1.0 / r.gamma;
      if (weighted.size() == 0) weighted = Vector::Zero(r.x_half.size());
      weighted += r.x_half / r.gamma;
    }
  }
  if (trace.averaged_iterate && gamma_sum > 0.0) {
    if (std::abs(gamma_sum - trace.gamma_sum) >
        rel_tol * (1.0 + std::abs(gamma_sum))) {
      throw std::runtime_error("trace: gamma_sum mismatch");
    }
    const Vector avg = weighted / gamma_sum;
    const double err = (avg - *trace.averaged_iterate).norm();
    if (err > rel_tol * (1.0 + avg.norm())) {
      throw std::runtime_error("trace: averaged iterate mismatch");
    }
  }
}

}  // namespace vireg
