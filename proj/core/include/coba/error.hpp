#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coba {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Config,
  // corpus
  MalformedRecord,
  EmptyDataset,
  // triple
  EmptyDecomposition,
  MissingGroup,
  DelimiterCollision,
  // classifier
  DegenerateData,
  BackendUnavailable,
  ShapeMismatch,
  // importance
  EmptyText,
  SingularFit,
  TooManyTokensForExact,
  UnsupportedMethod,
  AlignmentFailure,
  InvalidK,
  // ensemble
  EvenEnsembleWithoutTau,
  // llm
  ResponseTooLong,
  UnparsableModification,
  EmptyReconstruction,
  MockCannotDecompose,
  // augment
  UnknownLabel,
  AsymmetricLexicon,
  AllExamplesFailed,
  // analysis
  InconsistentModels,
  EmptyWordList,
  DimensionMismatch,
  ZeroVector,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. The code identifies the failure
/// class; `line()` is set for record-level parse errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace coba
