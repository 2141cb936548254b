#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vireg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown on inconsistent dimensions between a point and a set/problem.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown on invalid solver/problem configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void check_dimension(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected dimension " +
                         std::to_string(expected) + ", got " +
                         std::to_string(got));
  }
}

}  // namespace vireg
