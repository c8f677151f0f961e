#ifndef OMNIBUS_ERRORS_HPP
#define OMNIBUS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace omnibus {

/// An iterative routine (series, continued fraction, root bracketing)
/// failed to reach its tolerance. Distinct from domain errors so callers
/// can map the two onto different exit paths.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The design matrix (with intercept appended) is not full column rank.
class RankDeficientDesign : public std::invalid_argument {
 public:
  explicit RankDeficientDesign(const std::string& msg)
      : std::invalid_argument(msg) {}
};

}  // namespace omnibus

#endif  // OMNIBUS_ERRORS_HPP
