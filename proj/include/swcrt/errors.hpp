#pragma once

#include <stdexcept>
#include <string>

namespace swcrt {

// Base of all library errors. CLI exit-code mapping: validation-type errors
// exit 2, compute-type errors exit 3, I/O errors exit 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationFault : public Error {
 public:
  using Error::Error;
};

class ComputeFault : public Error {
 public:
  using Error::Error;
};

#define SWCRT_ERROR(NAME, BASE)                    \
  class NAME : public BASE {                       \
   public:                                         \
    explicit NAME(const std::string& msg)          \
        : BASE(std::string(#NAME ": ") + msg) {}   \
  }

SWCRT_ERROR(NonDivisibleAllocation, ValidationFault);
SWCRT_ERROR(DegenerateDesign, ValidationFault);
SWCRT_ERROR(IndexOutOfRange, ValidationFault);
SWCRT_ERROR(InvalidVariance, ValidationFault);
SWCRT_ERROR(InvalidGamma, ValidationFault);
SWCRT_ERROR(DimensionMismatch, ValidationFault);
SWCRT_ERROR(UndefinedEstimand, ValidationFault);
SWCRT_ERROR(WrongStructure, ValidationFault);
SWCRT_ERROR(MissingLikelihood, ValidationFault);
SWCRT_ERROR(UndefinedPair, ValidationFault);
SWCRT_ERROR(ParseError, ValidationFault);
SWCRT_ERROR(ValidationError, ValidationFault);
SWCRT_ERROR(SchemaError, ValidationFault);
SWCRT_ERROR(UnbalancedPanel, ValidationFault);

SWCRT_ERROR(SingularDesign, ComputeFault);
SWCRT_ERROR(NonConvergence, ComputeFault);
SWCRT_ERROR(TooFewClusters, ComputeFault);
SWCRT_ERROR(LeverageSingular, ComputeFault);

SWCRT_ERROR(IoError, Error);

#undef SWCRT_ERROR

}  // namespace swcrt
