#pragma once

#include <stdexcept>
#include <string>

namespace odmarl {

/// Input or configuration rejected before any work was done.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Query of a (state, action) pair with no observations. Distinct from a
/// probability of zero, which is only defined for visited pairs.
struct NoDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deviation weights could not be formed: the backup expectation or every
/// unnormalized mass fell below the configured value floor.
struct DegenerateValueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An iterative solver exhausted its sweep budget. Carries the last sup-norm
/// residual so callers can report how far from the fixed point the run ended.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A TD iterate left the plausible value range; what() carries diagnostics.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace odmarl
