#pragma once

#include <stdexcept>
#include <string>

namespace tpine {

/// Malformed or inconsistent input data (bad file contents, ids out of range).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical stage produced something unusable (non-finite values, empty result).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tpine
