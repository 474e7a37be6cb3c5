#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dynreg {

// Coefficient matrices live in dimension n <= 3; fixed max-size storage keeps
// the per-node field evaluations off the heap.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: violated preconditions, malformed expressions, rejected fields.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver its contract (step underflow, CG stall, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Largest absolute entry; the entrywise norm used for modulus checks.
template <class Derived>
double max_abs_entry(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace dynreg
