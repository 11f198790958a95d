/*
 * Copyright 2026 The fairaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FAIRAUDIT_ERROR_H_
#define FAIRAUDIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairaudit {

enum class ErrorCode {
  kMissingColumn,
  kBadValue,
  kEmptyFile,
  kDuplicateColumn,
  kSchemaInvalid,
  kInfeasibleSplit,
  kCannotDropOutcome,
  kDegenerateLabels,
  kFeatureMismatch,
  kConfigInvalid,
  kLengthMismatch,
  kNoPositivesInGroup,
  kUndefinedRate,
  kInsufficientFolds,
  kEmptyCell,
  kBadLambda,
  kEmptyGrid,
  kUnknownGroup,
  kSpecInvalid,
  kIncompleteReport,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// contract violation and `what()` carries the detail (row number, column, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const { return code_; }

  // True for failures caused by input data rather than caller misuse.
  bool IsDataError() const;

 private:
  ErrorCode code_;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_ERROR_H_
