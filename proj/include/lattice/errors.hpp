#pragma once

#include <stdexcept>
#include <string>

namespace lattice {

// Failure categories; the CLI maps them to exit codes (config 2,
// precondition 3, numerical 4).
enum class ErrorKind { Config, Precondition, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  virtual const char* name() const noexcept { return "Error"; }

 private:
  ErrorKind kind_;
};

#define LATTICE_DEFINE_ERROR(NAME, KIND)                      \
  class NAME : public Error {                                 \
   public:                                                    \
    explicit NAME(const std::string& w)                       \
        : Error(ErrorKind::KIND, w) {}                        \
    const char* name() const noexcept override { return #NAME; } \
  };

// Config / input errors.
LATTICE_DEFINE_ERROR(ParseError, Config)
LATTICE_DEFINE_ERROR(SchemaError, Config)

// Violated hypotheses and misuse.
LATTICE_DEFINE_ERROR(NotSummable, Precondition)
LATTICE_DEFINE_ERROR(NoValidAmplitude, Precondition)
LATTICE_DEFINE_ERROR(WindowMismatch, Precondition)
LATTICE_DEFINE_ERROR(ArityMismatch, Precondition)
LATTICE_DEFINE_ERROR(SlotOutOfRange, Precondition)
LATTICE_DEFINE_ERROR(PreconditionViolated, Precondition)
LATTICE_DEFINE_ERROR(NotInvertible, Precondition)
LATTICE_DEFINE_ERROR(ZeroLeadingCoefficient, Precondition)
LATTICE_DEFINE_ERROR(NotContraction, Precondition)
LATTICE_DEFINE_ERROR(ResonantOrder, Precondition)
LATTICE_DEFINE_ERROR(MethodInapplicable, Precondition)
LATTICE_DEFINE_ERROR(TooLarge, Precondition)
LATTICE_DEFINE_ERROR(ContourTooClose, Precondition)

// Numerical failures.
LATTICE_DEFINE_ERROR(NoConvergence, Numerical)
LATTICE_DEFINE_ERROR(Singular, Numerical)
LATTICE_DEFINE_ERROR(QuadratureStalled, Numerical)
LATTICE_DEFINE_ERROR(DomainEscape, Numerical)
LATTICE_DEFINE_ERROR(Overflow, Numerical)

#undef LATTICE_DEFINE_ERROR

}  // namespace lattice
