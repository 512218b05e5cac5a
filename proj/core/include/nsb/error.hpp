#pragma once

#include <stdexcept>
#include <string>

namespace nsb {

// Process exit codes used by the command-line driver.
enum class ExitCode : int {
  ok = 0,
  failure = 1,
  config = 2,
  resource_limit = 3,
  invariant_violation = 4,
  precondition = 5,
  domain = 6,
  divergence_too_slow = 7,
  io = 8,
  model_mismatch = 9,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual ExitCode code() const { return ExitCode::failure; }
};

#define NSB_DEFINE_ERROR(Name, Code)                              \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(what) {}       \
    ExitCode code() const override { return ExitCode::Code; }     \
  };

NSB_DEFINE_ERROR(ConfigError, config)
NSB_DEFINE_ERROR(ResourceLimitError, resource_limit)
NSB_DEFINE_ERROR(InvariantViolation, invariant_violation)
NSB_DEFINE_ERROR(PreconditionError, precondition)
NSB_DEFINE_ERROR(DomainError, domain)
NSB_DEFINE_ERROR(DivergenceTooSlowError, divergence_too_slow)
NSB_DEFINE_ERROR(IoError, io)
NSB_DEFINE_ERROR(ModelMismatchError, model_mismatch)

#undef NSB_DEFINE_ERROR

}  // namespace nsb
