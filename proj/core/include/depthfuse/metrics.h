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

#ifndef DEPTHFUSE_METRICS_H_
#define DEPTHFUSE_METRICS_H_

#include <cstddef>
#include <string>

#include "depthfuse/grid.h"

namespace depthfuse {

inline constexpr double kKittiMaxDepth = 90.0;
inline constexpr double kNyuMaxDepth = 10.0;
inline constexpr double kSilogEpsilon = 1e-6;

// clip(depth / d_max, 0, 1).
DepthGrid Normalize(const DepthGrid& depth, double d_max);

// All averages run over M = [gt > 0] and divide by n = max(1, sum M).
struct MaskedErrors {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n = 1;
  // sum M; 0 means the ground truth had no valid pixel.
  std::size_t valid = 0;
};

MaskedErrors MaskedRmseMae(const DepthGrid& pred, const DepthGrid& gt);

// (1/n) sum(|e| + e^2), e = (pred - gt) masked by gt > 0.
double L1L2Loss(const DepthGrid& pred, const DepthGrid& gt);

// Variance of masked log differences, log(pred + eps) - log(gt + eps).
double SilogLoss(const DepthGrid& pred_rel, const DepthGrid& gt,
                 double epsilon = kSilogEpsilon);

struct EvalReport {
  double rmse = 0.0;
  double mae = 0.0;
  double l1l2 = 0.0;
  double silog = 0.0;
  std::size_t valid_pixel_count = 0;
};

// RMSE/MAE in meters; both losses on the d_max-normalized rasters.
EvalReport Evaluate(const DepthGrid& pred, const DepthGrid& gt, double d_max);

// "rmse=...\nmae=...\n..." with full round-trip precision.
std::string ToKeyValue(const EvalReport& report);
std::string CsvHeader();
std::string ToCsvRow(const EvalReport& report);

}  // namespace depthfuse

#endif  // DEPTHFUSE_METRICS_H_
