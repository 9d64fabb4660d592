// Copyright 2026 The attrib Authors
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

#include "attrib/error.hpp"

namespace attrib {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kDecode: return "DecodeError";
    case ErrorCode::kInvalidParam: return "InvalidParam";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNotCentered: return "NotCentered";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kEmptyScores: return "EmptyScores";
    case ErrorCode::kPromptUnavailable: return "PromptUnavailable";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kTooMany: return "TooMany";
    case ErrorCode::kRegistryMiss: return "RegistryMiss";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kProtocol: return "Protocol";
    case ErrorCode::kRemote: return "Remote";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kUsage: return "UsageError";
  }
  return "Unknown";
}

}  // namespace attrib
