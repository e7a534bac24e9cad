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

#ifndef DEPTHFUSE_GRID_H_
#define DEPTHFUSE_GRID_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace depthfuse {

struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Row-major H x W raster of finite doubles. Depth rasters are in meters and
// use 0 for "no value"; the same type also carries signed intermediate
// fields (Laplacians, relative priors), so non-negativity is checked where a
// depth is ingested or emitted (see IsValidDepth).
class DepthGrid {
 public:
  DepthGrid() = default;
  DepthGrid(int height, int width, double fill = 0.0);
  DepthGrid(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double operator()(int row, int col) const {
    return values_[Index(row, col)];
  }
  double& operator()(int row, int col) { return values_[Index(row, col)]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::size_t Index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  bool Contains(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  bool SameShape(int height, int width) const {
    return height_ == height && width_ == width;
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  friend bool operator==(const DepthGrid&, const DepthGrid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, bool fill = false);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return bits_.size(); }

  bool operator()(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void Set(int row, int col, bool value) {
    bits_[static_cast<std::size_t>(row) * width_ + col] = value ? 1 : 0;
  }
  void Set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }

  std::size_t Count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

// H x W x C features, pixel-major (all channels of a pixel are contiguous).
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(int height, int width, int channels, double fill = 0.0);
  FeatureGrid(int height, int width, int channels, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }

  std::span<const double> at(int row, int col) const {
    return {values_.data() + Offset(row, col),
            static_cast<std::size_t>(channels_)};
  }
  std::span<double> at(int row, int col) {
    return {values_.data() + Offset(row, col),
            static_cast<std::size_t>(channels_)};
  }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t Offset(int row, int col) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

// Known set K = {sparse > 0} u border, unknown set U = its complement.
// Both lists are row-major; unknown_index_of maps a flat pixel index to its
// rank in `unknown`, or -1 for known pixels.
struct IndexPartition {
  int height = 0;
  int width = 0;
  std::vector<Pixel> known;
  std::vector<Pixel> unknown;
  std::vector<std::int32_t> unknown_index_of;

  bool IsUnknown(int row, int col) const {
    return unknown_index_of[static_cast<std::size_t>(row) * width + col] >= 0;
  }
};

std::string ShapeString(int height, int width);

// Throws kDimensionMismatch naming both shapes.
void RequireSameShape(const DepthGrid& a, const DepthGrid& b,
                      const char* a_name, const char* b_name);
void RequireSameShape(const DepthGrid& a, const BinaryMask& b,
                      const char* a_name, const char* b_name);
void RequireSameShape(const DepthGrid& a, const FeatureGrid& b,
                      const char* a_name, const char* b_name);
void RequireMinimumShape(int height, int width, int minimum = 3);

bool IsValidDepth(const DepthGrid& grid);

IndexPartition BuildPartition(const DepthGrid& sparse);

// Dirichlet field: sparse where sparse > 0, prior on the remaining border
// pixels, 0 on unknown pixels.
DepthGrid AssembleDirichletField(const DepthGrid& sparse,
                                 const DepthGrid& prior,
                                 const IndexPartition& partition);

}  // namespace depthfuse

#endif  // DEPTHFUSE_GRID_H_
