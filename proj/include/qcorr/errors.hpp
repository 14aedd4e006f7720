#pragma once

#include <stdexcept>
#include <string>

namespace qcorr {

/// Thrown when an argument violates an operation's precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a series fails to converge within its term budget.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double partial_sum, double tail_bound)
      : std::runtime_error(what + " (partial sum " + std::to_string(partial_sum) +
                           ", last term bound " + std::to_string(tail_bound) + ")"),
        partial_sum_(partial_sum),
        tail_bound_(tail_bound) {}

  double partial_sum() const noexcept { return partial_sum_; }
  double tail_bound() const noexcept { return tail_bound_; }

 private:
  double partial_sum_;
  double tail_bound_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ParameterError(message);
}

}  // namespace qcorr
