#pragma once

#include <stdexcept>
#include <string>

namespace ctrleq {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid inputs: malformed partitions, out-of-range indices, bound violations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numeric failures: divergent integration, exact-arithmetic overflow.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File-system and format failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctrleq
