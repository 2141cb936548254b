#pragma once

#include <cmath>
#include <cstdint>

#include "vireg/common.hpp"
#include "vireg/feasible_set.hpp"

namespace vireg {

/// Counter-based random stream: the value at index i is a pure function of
/// (seed, i), so any sub-range can be generated independently and in
/// parallel with bit-identical results. The mixing function is the
/// SplitMix64 finalizer applied to seed + (i+1) * golden-gamma.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t i) const {
    std::uint64_t z = seed_ + (i + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform(std::uint64_t i) const {
    return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as the log argument in Box-Muller.
  double uniform_open(std::uint64_t i) const {
    return static_cast<double>((bits(i) >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Draw i consumes the uniform pair at
  /// counters (2i, 2i+1) and keeps the cosine branch, so normal(i) stays a
  /// pure function of i.
  double normal(std::uint64_t i) const {
    const double u1 = uniform_open(2 * i);
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  std::uint64_t seed_;
};

/// Indexed point sampler over feasible sets and balls, built on CounterRng.
/// point i is a pure function of (seed, i); parallel loops over i are
/// deterministic regardless of scheduling.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  const CounterRng& rng() const { return rng_; }

  /// Standard-normal vector; draw i occupies normal counters [i*dim, (i+1)*dim).
  Vector gaussian(Index dim, std::uint64_t i) const {
    Vector v(dim);
    const std::uint64_t base = i * static_cast<std::uint64_t>(dim);
    for (Index j = 0; j < dim; ++j) v[j] = rng_.normal(base + j);
    return v;
  }

  /// Uniform point in the ball of given center and radius.
  Vector in_ball(const Vector& center, double radius, std::uint64_t i) const {
    const Index dim = center.size();
    Vector dir = gaussian(dim, 2 * i);
    const double nrm = dir.norm();
    if (nrm == 0.0) return center;
    const double u = rng_.uniform(2 * i * static_cast<std::uint64_t>(dim) + 1'000'003);
    const double r = radius * std::pow(u, 1.0 / static_cast<double>(dim));
    return center + (r / nrm) * dir;
  }

  /// Uniform point in a bounded feasible set (box or ball).
  /// Throws ConfigError for unbounded sets.
  Vector in_set(const FeasibleSet& set, std::uint64_t i) const {
    switch (set.kind()) {
      case SetKind::Box: {
        const Index dim = set.dimension();
        Vector v(dim);
        const std::uint64_t base = i * static_cast<std::uint64_t>(dim);
        for (Index j = 0; j < dim; ++j) {
          const double u = rng_.uniform(base + j);
          v[j] = set.lower()[j] + u * (set.upper()[j] - set.lower()[j]);
        }
        return v;
      }
      case SetKind::Ball:
        return in_ball(set.center(), set.radius(), i);
      default:
        throw ConfigError("Sampler::in_set requires a bounded set");
    }
  }

 private:
  CounterRng rng_;
};

}  // namespace vireg
