#pragma once

#include <stdexcept>

namespace sci {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

struct InsufficientDataError : Error {
  using Error::Error;
};

/// B + S == 0; callers treat it as a no-trade window.
struct ZeroVolumeError : Error {
  using Error::Error;
};

/// No trader with nonzero flow; callers treat it as a no-trade window.
struct ZeroFlowError : Error {
  using Error::Error;
};

struct WindowError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

}  // namespace sci
