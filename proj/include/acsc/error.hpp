#pragma once

#include <stdexcept>
#include <string>

namespace acsc {

/// Raised when a solver or linear system breaks down (non-finite values,
/// singular systems). Input validation failures use std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace acsc
