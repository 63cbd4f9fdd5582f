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

#ifndef SVKIT_ERROR_HPP_
#define SVKIT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace svkit {

enum class ErrorCode {
  // audio
  kMissingFile,
  kUnsupportedFormat,
  kEmptyBuffer,
  kInvalidArgument,
  // augmentation
  kInsufficientSpeakers,
  kEmptyPool,
  kSilentSignal,
  kSilentNoise,
  kRateMismatch,
  kEmptyRir,
  kMissingNoiseKind,
  // corpus
  kUnreadableSource,
  kMalformedRow,
  kDuplicateId,
  kEmptyManifest,
  kBadRatios,
  kInsufficientUtterances,
  kNotEnoughDistinctPairs,
  // scoring
  kBadMagic,
  kUnsupportedVersion,
  kDimMismatch,
  kTruncatedFile,
  kZeroVector,
  kLengthMismatch,
  kDegenerateCohort,
  kUnknownId,
  kMissingClass,
  // trainer
  kDegenerateBatch,
  kNonFiniteLoss,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

/// True for errors caused by bad user input or configuration, as opposed to
/// failures while doing the work. The CLI maps these to exit status 2.
bool IsValidationError(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace svkit

#endif  // SVKIT_ERROR_HPP_
