#pragma once

#include <stdexcept>
#include <string>

namespace t1t2 {

// Malformed or inconsistent input data (unsorted records, non-positive
// lifetimes, degenerate samples). Distinct from std::invalid_argument, which
// is used for bad parameters and configuration.
class data_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// An iterative or adaptive numerical routine failed to reach its tolerance.
// Carries the best value obtained so far.
class convergence_error : public std::runtime_error {
public:
  convergence_error(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}

  double partial_value() const noexcept { return partial_; }

private:
  double partial_;
};

} // namespace t1t2
