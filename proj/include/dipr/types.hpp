#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dipr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Bad configuration or misuse of an interface (maps to CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File-system / serialization problems (maps to CLI exit code 3).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure at run time (maps to CLI exit code 4).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a regularized objective is not positive definite. The caller
// sees the offending eigenvalue instead of a silently jittered solve.
struct NonConvexObjective : NumericalError {
  NonConvexObjective(const std::string& msg, double eig)
      : NumericalError(msg), min_eigenvalue(eig) {}
  double min_eigenvalue;
};

}  // namespace dipr
