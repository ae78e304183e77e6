#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace riszf {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Condition-number limit above which a Gram base matrix is treated as
// singular and the pseudoinverse code path takes over.
inline constexpr double kCondLimit = 1e12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The Gram base matrix is too ill-conditioned for the regular inverse
// formulas; callers route to the pseudoinverse variants.
class SingularBase : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical degeneracy that invalidates a candidate allocation
// (e.g. a non-positive channel gain or an unreachable null direction).
class DegenerateAllocation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace riszf
