// anonvec/error.hpp

// Copyright 2026  The anonvec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace anonvec {

enum class ErrorKind {
  DimensionMismatch,
  ZeroNorm,
  EmptyInput,
  MixedSpeakers,
  ParseError,
  DuplicateUtterance,
  EmptyPool,
  KTooLarge,
  DimensionChainBroken,
  EmptyTrainingSet,
  NonFiniteObjective,
  EmptyScores,
  UnknownSpeaker,
  MissingCheckpoint,
  InvalidArgument,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroNorm: return "ZeroNorm";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MixedSpeakers: return "MixedSpeakers";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateUtterance: return "DuplicateUtterance";
    case ErrorKind::EmptyPool: return "EmptyPool";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::DimensionChainBroken: return "DimensionChainBroken";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::EmptyScores: return "EmptyScores";
    case ErrorKind::UnknownSpeaker: return "UnknownSpeaker";
    case ErrorKind::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line()` is 1-based and 0 when the
/// error is not tied to a line of an input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what, std::size_t line = 0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        line_(line),
        message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// what() without the kind prefix.
  const std::string &message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what,
                              std::size_t line = 0) {
  throw Error(kind, what, line);
}

}  // namespace anonvec
