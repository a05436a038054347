#ifndef SBP_ERRORS_HPP
#define SBP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sbp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad sizes, malformed tables, unknown options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operator or metric identity failed beyond tolerance.
class VerificationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during time stepping.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// J <= 0 or a non-SPD metric sample.
class SingularMappingError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace sbp

#endif  // SBP_ERRORS_HPP
