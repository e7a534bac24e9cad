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

#include "depthfuse/grid.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "depthfuse/error.h"

namespace depthfuse {
namespace {

void CheckDims(int height, int width) {
  if (height < 0 || width < 0) {
    throw Error(ErrorCode::kInvalidParameter,
                "negative raster dimensions " + ShapeString(height, width));
  }
}

void CheckFinite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "non-finite value at flat index " << i;
      throw Error(ErrorCode::kNonFiniteValue, msg.str());
    }
  }
}

}  // namespace

DepthGrid::DepthGrid(int height, int width, double fill)
    : height_(height), width_(width) {
  CheckDims(height, width);
  if (!std::isfinite(fill)) {
    throw Error(ErrorCode::kNonFiniteValue, "non-finite fill value");
  }
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

DepthGrid::DepthGrid(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  CheckDims(height, width);
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    std::ostringstream msg;
    msg << "raster " << ShapeString(height, width) << " needs "
        << static_cast<std::size_t>(height) * width << " values, got "
        << values_.size();
    throw Error(ErrorCode::kLengthMismatch, msg.str());
  }
  CheckFinite(values_);
}

BinaryMask::BinaryMask(int height, int width, bool fill)
    : height_(height), width_(width) {
  CheckDims(height, width);
  bits_.assign(static_cast<std::size_t>(height) * width, fill ? 1 : 0);
}

std::size_t BinaryMask::Count() const {
  return static_cast<std::size_t>(
      std::count_if(bits_.begin(), bits_.end(), [](auto b) { return b != 0; }));
}

FeatureGrid::FeatureGrid(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  CheckDims(height, width);
  if (channels < 1) {
    throw Error(ErrorCode::kInvalidParameter, "feature grid needs >= 1 channel");
  }
  values_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  CheckFinite(values_);
}

FeatureGrid::FeatureGrid(int height, int width, int channels,
                         std::vector<double> values)
    : height_(height), width_(width), channels_(channels),
      values_(std::move(values)) {
  CheckDims(height, width);
  if (channels < 1) {
    throw Error(ErrorCode::kInvalidParameter, "feature grid needs >= 1 channel");
  }
  if (values_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw Error(ErrorCode::kLengthMismatch,
                "feature value count does not match H*W*C");
  }
  CheckFinite(values_);
}

std::string ShapeString(int height, int width) {
  return std::to_string(height) + "x" + std::to_string(width);
}

namespace {

[[noreturn]] void ThrowMismatch(const char* a_name, int ah, int aw,
                                const char* b_name, int bh, int bw) {
  std::ostringstream msg;
  msg << "dimension mismatch: " << a_name << " is " << ShapeString(ah, aw)
      << " but " << b_name << " is " << ShapeString(bh, bw);
  throw Error(ErrorCode::kDimensionMismatch, msg.str());
}

}  // namespace

void RequireSameShape(const DepthGrid& a, const DepthGrid& b,
                      const char* a_name, const char* b_name) {
  if (!a.SameShape(b.height(), b.width())) {
    ThrowMismatch(a_name, a.height(), a.width(), b_name, b.height(), b.width());
  }
}

void RequireSameShape(const DepthGrid& a, const BinaryMask& b,
                      const char* a_name, const char* b_name) {
  if (!a.SameShape(b.height(), b.width())) {
    ThrowMismatch(a_name, a.height(), a.width(), b_name, b.height(), b.width());
  }
}

void RequireSameShape(const DepthGrid& a, const FeatureGrid& b,
                      const char* a_name, const char* b_name) {
  if (!a.SameShape(b.height(), b.width())) {
    ThrowMismatch(a_name, a.height(), a.width(), b_name, b.height(), b.width());
  }
}

void RequireMinimumShape(int height, int width, int minimum) {
  if (height < minimum || width < minimum) {
    std::ostringstream msg;
    msg << "raster " << ShapeString(height, width) << " is smaller than "
        << minimum << "x" << minimum;
    throw Error(ErrorCode::kDimensionTooSmall, msg.str());
  }
}

bool IsValidDepth(const DepthGrid& grid) {
  return std::all_of(grid.values().begin(), grid.values().end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0; });
}

IndexPartition BuildPartition(const DepthGrid& sparse) {
  const int h = sparse.height();
  const int w = sparse.width();
  RequireMinimumShape(h, w);

  IndexPartition partition;
  partition.height = h;
  partition.width = w;
  partition.unknown_index_of.assign(static_cast<std::size_t>(h) * w, -1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const bool border = r == 0 || c == 0 || r == h - 1 || c == w - 1;
      if (border || sparse(r, c) > 0.0) {
        partition.known.push_back({r, c});
      } else {
        partition.unknown_index_of[sparse.Index(r, c)] =
            static_cast<std::int32_t>(partition.unknown.size());
        partition.unknown.push_back({r, c});
      }
    }
  }
  return partition;
}

DepthGrid AssembleDirichletField(const DepthGrid& sparse,
                                 const DepthGrid& prior,
                                 const IndexPartition& partition) {
  RequireSameShape(sparse, prior, "sparse", "prior");
  if (!sparse.SameShape(partition.height, partition.width)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "partition shape " +
                    ShapeString(partition.height, partition.width) +
                    " does not match sparse " +
                    ShapeString(sparse.height(), sparse.width()));
  }
  DepthGrid field(sparse.height(), sparse.width(), 0.0);
  for (const Pixel& p : partition.known) {
    const double measured = sparse(p.row, p.col);
    // A measurement on the border outranks the prior's boundary value.
    field(p.row, p.col) = measured > 0.0 ? measured : prior(p.row, p.col);
  }
  return field;
}

}  // namespace depthfuse
