#pragma once

#include <stdexcept>
#include <string>

namespace shadowgm {

/// Base of every error raised by the library. `kind()` is the stable,
/// machine-readable name written into the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define SHADOWGM_ERROR(Name)                                          \
  class Name : public Error {                                         \
   public:                                                            \
    using Error::Error;                                               \
    const char* kind() const noexcept override { return #Name; }      \
  }

/// Input outside the mathematical domain of an operation.
SHADOWGM_ERROR(DomainError);
/// Exponents violate 0 < (p-1)/r < q/(s+1).
SHADOWGM_ERROR(AdmissibilityViolation);
/// A time step exceeded a growth cap; the caller must shrink dt.
SHADOWGM_ERROR(StepRejected);
/// NaN, infinity or a negative field value appeared.
SHADOWGM_ERROR(NumericalBreakdown);
/// No (beta, k) pair satisfies the integral-estimate constraints.
SHADOWGM_ERROR(InfeasibleSelection);
/// Malformed or inconsistent configuration.
SHADOWGM_ERROR(ConfigError);

#undef SHADOWGM_ERROR

}  // namespace shadowgm
