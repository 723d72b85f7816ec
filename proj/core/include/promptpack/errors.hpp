#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace promptpack {

enum class ErrorCode {
  InvalidArgument,
  EmptyCorpus,
  ProviderFailure,
  EmptyInput,
  DictionaryMismatch,
  UnknownPlaceholder,
  EmptyColumn,
  InvalidK,
  ToleranceUnreachable,
  TooFewRows,
  SingleCluster,
  ZeroVector,
  DimensionMismatch,
  UnknownModel,
  InvalidConfig,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Base of every error thrown by the library. The code is stable and is what
// the CLI and HTTP layers map to exit statuses / response codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A probability provider could not answer. Carries the index of the token
// (into the TokenStream) being scored when known.
class ProviderFailure : public Error {
 public:
  static constexpr std::size_t kNoPosition = static_cast<std::size_t>(-1);

  explicit ProviderFailure(const std::string& message, std::size_t token_index = kNoPosition)
      : Error(ErrorCode::ProviderFailure, message), token_index_(token_index) {}

  std::size_t token_index() const noexcept { return token_index_; }

 private:
  std::size_t token_index_;
};

// Raised by the pipeline orchestrator: wraps the failure of a single stage.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, ErrorCode cause, const std::string& message)
      : Error(cause, "stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace promptpack
