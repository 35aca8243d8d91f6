#pragma once

#include <stdexcept>
#include <string>

namespace driftlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalDomainError : Error { using Error::Error; };
struct SingularMetricError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct PreconditionError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct FlatnessError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

struct VerificationFailure : Error {
  std::string report;
  VerificationFailure(const std::string& what, std::string rep = {})
      : Error(what), report(std::move(rep)) {}
};

}  // namespace driftlab
