#include "wcsplit/errors.hpp"

namespace wcsplit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyValidation: return "EmptyValidation";
    case ErrorCode::EmptyTraining: return "EmptyTraining";
    case ErrorCode::MissingDomains: return "MissingDomains";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::DegenerateLandmarks: return "DegenerateLandmarks";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::SingleDomainDataset: return "SingleDomainDataset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace wcsplit
