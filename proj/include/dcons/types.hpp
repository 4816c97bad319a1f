#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dcons {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Base of everything the library throws. `what()` names the failing check.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// h >= 1/d_max, or a dwell time that is not a multiple of h.
class SamplingPeriodError : public Error {
 public:
  using Error::Error;
};

// A connectivity or primitivity hypothesis does not hold.
class ConnectivityError : public Error {
 public:
  using Error::Error;
};

// A numerical routine did not converge or a cross-check disagreed.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Structural preconditions of a bound (scenario form, lambda_bar < 1, ...).
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline Vector ones(Index n) { return Vector::Ones(n); }

// 11^T / n
inline Matrix averaging_matrix(Index n) {
  return Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace dcons
