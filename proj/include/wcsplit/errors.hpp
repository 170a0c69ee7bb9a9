#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wcsplit {

enum class ErrorCode {
  InvalidArgument,
  EmptyDataset,
  EmptyValidation,
  EmptyTraining,
  MissingDomains,
  NonFiniteInput,
  NonFiniteValue,  // non-finite number in an input file
  DimensionMismatch,
  BudgetExceeded,
  DegenerateLandmarks,
  EmptySet,
  EmptyCluster,
  Infeasible,
  UnknownDomain,
  SingleDomainDataset,
  LengthMismatch,
  DegenerateInput,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries one of the codes above so the
// CLI can emit a machine-readable error without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wcsplit
