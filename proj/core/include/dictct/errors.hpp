#pragma once

#include <stdexcept>
#include <string>

namespace dictct {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible sizes: non-divisible patch grids, vector length mismatches.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Scan geometry the projector does not support.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter value (negative noise level, lambda out of range, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A solver produced a non-finite iterate.
class DivergedError : public Error {
 public:
  using Error::Error;
};

/// Not enough training data for the requested dictionary size.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Artifacts that do not belong together (hash or shape mismatch).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

namespace detail {
[[noreturn]] void throw_dimension(const std::string& what, long expected, long actual);
}  // namespace detail

}  // namespace dictct
