// Copyright 2026 The wpdeeg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wpdeeg/error.hpp"

namespace wpdeeg {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kTruncatedData: return "TruncatedData";
    case ErrorCode::kNonFiniteSample: return "NonFiniteSample";
    case ErrorCode::kRaggedRows: return "RaggedRows";
    case ErrorCode::kNonNumericCell: return "NonNumericCell";
    case ErrorCode::kDurationTooShort: return "DurationTooShort";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMissingChannel: return "MissingChannel";
    case ErrorCode::kUpsamplingRequested: return "UpsamplingRequested";
    case ErrorCode::kRecordingTooShort: return "RecordingTooShort";
    case ErrorCode::kSignalTooShort: return "SignalTooShort";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kWrongLength: return "WrongLength";
    case ErrorCode::kTooFewSegments: return "TooFewSegments";
    case ErrorCode::kCorruptFeatureFile: return "CorruptFeatureFile";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidFractions: return "InvalidFractions";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kCorruptModelFile: return "CorruptModelFile";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kUndefinedMetric: return "UndefinedMetric";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kTooManyFailures: return "TooManyFailures";
  }
  return "Unknown";
}

}  // namespace wpdeeg
