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

#include "depthfuse/error.h"

namespace depthfuse {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionTooSmall: return "dimension-too-small";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kNonFiniteValue: return "non-finite-value";
    case ErrorCode::kNumericFailure: return "numeric-failure";
    case ErrorCode::kInsufficientAnchors: return "insufficient-anchors";
    case ErrorCode::kDegeneratePrior: return "degenerate-prior";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kDegenerateNeighborhood: return "degenerate-neighborhood";
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kSizeExceeded: return "size-exceeded";
    case ErrorCode::kCountExceedsPixels: return "count-exceeds-pixels";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kWrongBitDepth: return "wrong-bit-depth";
    case ErrorCode::kWrongChannelCount: return "wrong-channel-count";
    case ErrorCode::kMalformedHeader: return "malformed-header";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace depthfuse
