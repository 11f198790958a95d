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

#include "fairaudit/error.h"

namespace fairaudit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kBadValue: return "BadValue";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kDuplicateColumn: return "DuplicateColumn";
    case ErrorCode::kSchemaInvalid: return "SchemaInvalid";
    case ErrorCode::kInfeasibleSplit: return "InfeasibleSplit";
    case ErrorCode::kCannotDropOutcome: return "CannotDropOutcome";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kFeatureMismatch: return "FeatureMismatch";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNoPositivesInGroup: return "NoPositivesInGroup";
    case ErrorCode::kUndefinedRate: return "UndefinedRate";
    case ErrorCode::kInsufficientFolds: return "InsufficientFolds";
    case ErrorCode::kEmptyCell: return "EmptyCell";
    case ErrorCode::kBadLambda: return "BadLambda";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kUnknownGroup: return "UnknownGroup";
    case ErrorCode::kSpecInvalid: return "SpecInvalid";
    case ErrorCode::kIncompleteReport: return "IncompleteReport";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
      code_(code) {}

bool Error::IsDataError() const {
  switch (code_) {
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kSchemaInvalid:
    case ErrorCode::kSpecInvalid:
      return false;
    default:
      return true;
  }
}

}  // namespace fairaudit
