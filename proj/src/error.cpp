// Copyright 2026 The svkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svkit/error.hpp"

namespace svkit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kEmptyBuffer: return "EmptyBuffer";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInsufficientSpeakers: return "InsufficientSpeakers";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kSilentSignal: return "SilentSignal";
    case ErrorCode::kSilentNoise: return "SilentNoise";
    case ErrorCode::kRateMismatch: return "RateMismatch";
    case ErrorCode::kEmptyRir: return "EmptyRIR";
    case ErrorCode::kMissingNoiseKind: return "MissingNoiseKind";
    case ErrorCode::kUnreadableSource: return "UnreadableSource";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyManifest: return "EmptyManifest";
    case ErrorCode::kBadRatios: return "BadRatios";
    case ErrorCode::kInsufficientUtterances: return "InsufficientUtterances";
    case ErrorCode::kNotEnoughDistinctPairs: return "NotEnoughDistinctPairs";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateCohort: return "DegenerateCohort";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kMissingClass: return "MissingClass";
    case ErrorCode::kDegenerateBatch: return "DegenerateBatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

bool IsValidationError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFiniteLoss:
    case ErrorCode::kIo:
      return false;
    default:
      return true;
  }
}

}  // namespace svkit
