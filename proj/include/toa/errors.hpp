#pragma once

#include <stdexcept>
#include <string>

namespace toa {

// Precondition violated by the caller (bad shapes, empty sets, out-of-range
// parameters, non-finite values).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A factorization failed or a derivative is undefined at the requested point.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A recursion step could not be completed. Carries the step index.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, int step)
      : std::runtime_error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

}  // namespace toa
