// Copyright 2026 The DepthFuse Authors
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

#ifndef DEPTHFUSE_ERROR_H_
#define DEPTHFUSE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace depthfuse {

enum class ErrorCode {
  kDimensionTooSmall,
  kDimensionMismatch,
  kLengthMismatch,
  kNonFiniteValue,
  kNumericFailure,
  kInsufficientAnchors,
  kDegeneratePrior,
  kDomain,
  kDegenerateNeighborhood,
  kInvalidParameter,
  kSizeExceeded,
  kCountExceedsPixels,
  kOutOfRange,
  kWrongBitDepth,
  kWrongChannelCount,
  kMalformedHeader,
  kIo,
  kConfig,
};

std::string_view ToString(ErrorCode code);

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace depthfuse

#endif  // DEPTHFUSE_ERROR_H_
