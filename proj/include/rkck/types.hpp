#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rkck {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kImag{0.0, 1.0};

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input or violated precondition (CLI exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical ambiguity: spectral boundary hits, rank collapse (CLI exit code 2).
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

/// Requested dimension exceeds the configured cap (CLI exit code 3).
class ResourceCapError : public Error {
 public:
  using Error::Error;
};

/// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace rkck
