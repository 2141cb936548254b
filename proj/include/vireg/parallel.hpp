#pragma once

#include <vector>

#include "vireg/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vireg::par {

// Fixed block width for sum reductions. Partial sums are formed per block
// and combined in block order, so the result is bitwise identical for any
// thread count, including the serial path.
inline constexpr Index kBlock = 64;

inline Index num_blocks(Index n) { return (n + kBlock - 1) / kBlock; }

/// Deterministic parallel sum of f(i) over i in [0, n), f returning double.
template <class F>
double block_sum(Index n, F&& f) {
  const Index nb = num_blocks(n);
  std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index lo = b * kBlock;
    const Index hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (Index i = lo; i < hi; ++i) s += f(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

/// Deterministic parallel sum of vector-valued terms. `accumulate(acc, i)`
/// must add term i into acc; acc dimension is `dim`.
template <class F>
Vector block_vector_sum(Index n, Index dim, F&& accumulate) {
  const Index nb = num_blocks(n);
  std::vector<Vector> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    Vector acc = Vector::Zero(dim);
    const Index lo = b * kBlock;
    const Index hi = std::min(n, lo + kBlock);
    for (Index i = lo; i < hi; ++i) accumulate(acc, i);
    partial[static_cast<std::size_t>(b)] = std::move(acc);
  }
  Vector total = Vector::Zero(dim);
  for (const Vector& p : partial) total += p;
  return total;
}

/// Deterministic parallel sum of matrix-valued terms.
template <class F>
Matrix block_matrix_sum(Index n, Index rows, Index cols, F&& accumulate) {
  const Index nb = num_blocks(n);
  std::vector<Matrix> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    Matrix acc = Matrix::Zero(rows, cols);
    const Index lo = b * kBlock;
    const Index hi = std::min(n, lo + kBlock);
    for (Index i = lo; i < hi; ++i) accumulate(acc, i);
    partial[static_cast<std::size_t>(b)] = std::move(acc);
  }
  Matrix total = Matrix::Zero(rows, cols);
  for (const Matrix& p : partial) total += p;
  return total;
}

/// Parallel max of f(i); fp max is associative and commutative, so the
/// reduction order does not affect the result.
template <class F>
double max_reduce(Index n, F&& f) {
  double best = -std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(max : best)
  for (Index i = 0; i < n; ++i) {
    const double v = f(i);
    if (v > best) best = v;
  }
  return best;
}

template <class F>
double min_reduce(Index n, F&& f) {
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(min : best)
  for (Index i = 0; i < n; ++i) {
    const double v = f(i);
    if (v < best) best = v;
  }
  return best;
}

/// Index of the max of f(i), ties broken toward the smaller index so the
/// result is scheduling-independent.
template <class F>
Index argmax(Index n, F&& f) {
  std::vector<double> vals(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = f(i);
  Index best = 0;
  for (Index i = 1; i < n; ++i) {
    if (vals[static_cast<std::size_t>(i)] > vals[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

}  // namespace vireg::par
