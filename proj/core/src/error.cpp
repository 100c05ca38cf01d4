#include "coba/error.hpp"

namespace coba {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyDecomposition: return "EmptyDecomposition";
    case ErrorCode::MissingGroup: return "MissingGroup";
    case ErrorCode::DelimiterCollision: return "DelimiterCollision";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::SingularFit: return "SingularFit";
    case ErrorCode::TooManyTokensForExact: return "TooManyTokensForExact";
    case ErrorCode::UnsupportedMethod: return "UnsupportedMethod";
    case ErrorCode::AlignmentFailure: return "AlignmentFailure";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::EvenEnsembleWithoutTau: return "EvenEnsembleWithoutTau";
    case ErrorCode::ResponseTooLong: return "ResponseTooLong";
    case ErrorCode::UnparsableModification: return "UnparsableModification";
    case ErrorCode::EmptyReconstruction: return "EmptyReconstruction";
    case ErrorCode::MockCannotDecompose: return "MockCannotDecompose";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::AsymmetricLexicon: return "AsymmetricLexicon";
    case ErrorCode::AllExamplesFailed: return "AllExamplesFailed";
    case ErrorCode::InconsistentModels: return "InconsistentModels";
    case ErrorCode::EmptyWordList: return "EmptyWordList";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what,
             std::optional<std::size_t> line)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code),
      line_(line) {}

}  // namespace coba
