#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cstag {

enum class ErrorCode {
  // Data validation
  MalformedLine,
  UnknownLanguageTag,
  InvalidBioSequence,
  InvalidToken,
  EmptyCorpus,
  UnlabeledGold,
  ShapeMismatch,
  TaskMismatch,
  DuplicateSentenceId,
  OverlappingSentences,
  // Configuration / arguments
  DegenerateSplit,
  InvalidFractions,
  InvalidConfig,
  InvalidSpec,
  // Model
  EmptyModel,
  ModeMismatch,
  VersionMismatch,
  ParseError,
  // Self-training
  NoSwitchPoints,
  NoEligibleSentences,
  EmptyPool,
  // Environment
  IoError,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by the content of an input file or corpus.
bool is_data_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cstag
