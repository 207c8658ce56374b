#pragma once

#include <stdexcept>
#include <string>

namespace hsc {

// Malformed or inconsistent input data: bad cube files, corrupt containers,
// out-of-range samples. The CLI maps these to exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncatedStream : public DataError {
 public:
  using DataError::DataError;
};

// Invalid parameters supplied by the caller (exit code 2 at the CLI).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hsc
