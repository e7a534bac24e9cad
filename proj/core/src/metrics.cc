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

#include "depthfuse/metrics.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "depthfuse/error.h"

namespace depthfuse {
namespace {

std::size_t ValidCount(const DepthGrid& gt) {
  return static_cast<std::size_t>(std::count_if(
      gt.values().begin(), gt.values().end(), [](double v) { return v > 0.0; }));
}

std::string FormatDouble(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

DepthGrid Normalize(const DepthGrid& depth, double d_max) {
  if (!(d_max > 0.0) || !std::isfinite(d_max)) {
    throw Error(ErrorCode::kInvalidParameter, "d_max must be positive");
  }
  DepthGrid out = depth;
  for (double& v : out.values()) v = std::clamp(v / d_max, 0.0, 1.0);
  return out;
}

MaskedErrors MaskedRmseMae(const DepthGrid& pred, const DepthGrid& gt) {
  RequireSameShape(pred, gt, "pred", "gt");
  MaskedErrors errors;
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] > 0.0) {
      const double e = pred[i] - gt[i];
      sq += e * e;
      abs += std::abs(e);
      ++errors.valid;
    }
  }
  errors.n = std::max<std::size_t>(1, errors.valid);
  errors.rmse = std::sqrt(sq / static_cast<double>(errors.n));
  errors.mae = abs / static_cast<double>(errors.n);
  return errors;
}

double L1L2Loss(const DepthGrid& pred, const DepthGrid& gt) {
  RequireSameShape(pred, gt, "pred", "gt");
  double total = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] > 0.0) {
      const double e = pred[i] - gt[i];
      total += std::abs(e) + e * e;
    }
  }
  return total / static_cast<double>(std::max<std::size_t>(1, ValidCount(gt)));
}

double SilogLoss(const DepthGrid& pred_rel, const DepthGrid& gt,
                 double epsilon) {
  RequireSameShape(pred_rel, gt, "pred", "gt");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] > 0.0) {
      // Negative predictions are floored at 0 so the log stays defined.
      const double p = std::max(pred_rel[i], 0.0);
      const double d = std::log(p + epsilon) - std::log(gt[i] + epsilon);
      sum += d;
      sum_sq += d * d;
    }
  }
  const double n =
      static_cast<double>(std::max<std::size_t>(1, ValidCount(gt)));
  const double mean = sum / n;
  return std::max(0.0, sum_sq / n - mean * mean);
}

EvalReport Evaluate(const DepthGrid& pred, const DepthGrid& gt, double d_max) {
  const MaskedErrors errors = MaskedRmseMae(pred, gt);
  const DepthGrid pred_n = Normalize(pred, d_max);
  const DepthGrid gt_n = Normalize(gt, d_max);
  EvalReport report;
  report.rmse = errors.rmse;
  report.mae = errors.mae;
  report.l1l2 = L1L2Loss(pred_n, gt_n);
  report.silog = SilogLoss(pred_n, gt_n);
  report.valid_pixel_count = errors.valid;
  return report;
}

std::string ToKeyValue(const EvalReport& report) {
  std::ostringstream out;
  out << "rmse=" << FormatDouble(report.rmse) << '\n'
      << "mae=" << FormatDouble(report.mae) << '\n'
      << "l1l2=" << FormatDouble(report.l1l2) << '\n'
      << "silog=" << FormatDouble(report.silog) << '\n'
      << "n=" << report.valid_pixel_count << '\n';
  return out.str();
}

std::string CsvHeader() { return "rmse,mae,l1l2,silog,n"; }

std::string ToCsvRow(const EvalReport& report) {
  std::ostringstream out;
  out << FormatDouble(report.rmse) << ',' << FormatDouble(report.mae) << ','
      << FormatDouble(report.l1l2) << ',' << FormatDouble(report.silog) << ','
      << report.valid_pixel_count;
  return out.str();
}

}  // namespace depthfuse
