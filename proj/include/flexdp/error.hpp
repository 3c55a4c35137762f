//
// Copyright 2026 The FlexDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#ifndef FLEXDP_ERROR_HPP_
#define FLEXDP_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flexdp {

enum class ErrorCode {
  kParse,
  kUnsupportedQuery,
  kUnknownTable,
  kUnknownColumn,
  kUnresolvedAttribute,
  kMissingMetric,
  kInvalidParams,
  kInvalidScale,
  kFormat,
  kNegativeCount,
  kMissingColumn,
  kBudgetExhausted,
  kProtectedBinLabels,
  kUnknownBinLabel,
  kEvaluation,
  kTooLargeToEnumerate,
  kIo,
};

// Coarse grouping used for CLI diagnostics and exit codes.
enum class ErrorCategory { kParse, kUnsupported, kMissingMetric, kInvalidParams, kBudget, kIo };

inline ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kUnknownTable:
    case ErrorCode::kUnknownColumn:
    case ErrorCode::kUnresolvedAttribute:
      return ErrorCategory::kParse;
    case ErrorCode::kUnsupportedQuery:
    case ErrorCode::kProtectedBinLabels:
    case ErrorCode::kUnknownBinLabel:
      return ErrorCategory::kUnsupported;
    case ErrorCode::kMissingMetric:
      return ErrorCategory::kMissingMetric;
    case ErrorCode::kInvalidParams:
    case ErrorCode::kInvalidScale:
      return ErrorCategory::kInvalidParams;
    case ErrorCode::kBudgetExhausted:
      return ErrorCategory::kBudget;
    case ErrorCode::kFormat:
    case ErrorCode::kNegativeCount:
    case ErrorCode::kMissingColumn:
    case ErrorCode::kEvaluation:
    case ErrorCode::kTooLargeToEnumerate:
    case ErrorCode::kIo:
      return ErrorCategory::kIo;
  }
  return ErrorCategory::kIo;
}

inline std::string_view CategoryName(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kUnsupported: return "unsupported";
    case ErrorCategory::kMissingMetric: return "missing-metric";
    case ErrorCategory::kInvalidParams: return "invalid-params";
    case ErrorCategory::kBudget: return "budget";
    case ErrorCategory::kIo: return "io";
  }
  return "io";
}

// 0 success, 1 analysis rejection, 2 budget refusal, 3 I/O or format error.
inline int ExitCodeFor(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kBudget: return 2;
    case ErrorCategory::kIo: return 3;
    default: return 1;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + message
                                : message),
        code_(code),
        line_(line) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return CategoryOf(code_); }
  std::optional<std::size_t> line() const { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace flexdp

#endif  // FLEXDP_ERROR_HPP_
