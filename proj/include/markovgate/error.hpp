#pragma once

#include <stdexcept>
#include <string>

namespace markovgate {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No sample point falls inside the smoothing window.
class DegenerateWindow : public Error {
 public:
  using Error::Error;
};

/// The local-linear design matrix is singular (fewer than two distinct
/// points, or determinant below the ridge floor).
class DegenerateDesign : public Error {
 public:
  using Error::Error;
};

/// Too few sample points carry positive weight for a statistic.
class InsufficientSupport : public Error {
 public:
  using Error::Error;
};

/// The least-squares AR(1) slope falls outside (0, 1).
class NonstationaryFit : public Error {
 public:
  using Error::Error;
};

/// Plug-in asymptotic calibration produced a non-positive mean or variance.
class CalibrationFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or invalid parameter values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Too many Monte Carlo or bootstrap replicates failed.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace markovgate
