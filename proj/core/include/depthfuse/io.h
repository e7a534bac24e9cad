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

#ifndef DEPTHFUSE_IO_H_
#define DEPTHFUSE_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "depthfuse/grid.h"

namespace depthfuse {

// 16-bit grayscale depth PNG: code = round(meters * 256), 0 = invalid.
struct DepthPngCodec {
  static constexpr double kScale = 256.0;
  static constexpr std::uint16_t kInvalidCode = 0;
  static constexpr double kMaxDepth = 65535.0 / kScale;

  // Negative depths map to 0; depths above kMaxDepth throw kOutOfRange.
  static std::uint16_t Encode(double meters);
  static double Decode(std::uint16_t code) { return code / kScale; }
};

DepthGrid ReadDepthPng(const std::filesystem::path& path);
void WriteDepthPng(const DepthGrid& grid, const std::filesystem::path& path);

// Raw 16-bit grayscale PNG access, for code-level round-trip checks.
struct CodeRaster {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> codes;
};
CodeRaster ReadPng16(const std::filesystem::path& path);
void WritePng16(const CodeRaster& raster, const std::filesystem::path& path);

// Observation masks travel as 8-bit grayscale PNG (0 / 255). Any nonzero
// sample of an 8- or 16-bit grayscale PNG reads as set.
BinaryMask ReadMaskPng(const std::filesystem::path& path);
void WriteMaskPng(const BinaryMask& mask, const std::filesystem::path& path);

// Grayscale Portable Float Map ("Pf"). Rows are stored bottom-up on disk and
// returned top-down; a negative scale marks a little-endian payload.
DepthGrid DecodePfm(std::span<const std::byte> bytes);
std::vector<std::byte> EncodePfm(const DepthGrid& grid,
                                 bool little_endian = true);
DepthGrid ReadFloatRaster(const std::filesystem::path& path);
void WriteFloatRaster(const DepthGrid& grid, const std::filesystem::path& path);

// xorshift64* seeded through splitmix64. The exact sequence is part of the
// file contract: masks drawn with the same seed must match everywhere.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);

  std::uint64_t Next();
  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t Below(std::uint64_t bound);
  // Uniform double in [0, 1) from the top 53 bits.
  double Uniform();

 private:
  std::uint64_t state_;
};

enum class SparsityMode { kUniformRandom, kEveryNthRow, kFixedCount };

struct SparsitySpec {
  SparsityMode mode = SparsityMode::kUniformRandom;
  // kUniformRandom: exactly round(density * H * W) pixels (at least 1).
  // kEveryNthRow: every round(1 / density)-th row, seed picks the phase.
  double density = 0.06;
  // kFixedCount only.
  std::size_t count = 0;
  std::uint64_t seed = 0;

  void Validate(int height, int width) const;
};

// Selected pixels that also carry a valid (> 0) dense value form the mask;
// the sparse raster is dense * mask.
std::pair<DepthGrid, BinaryMask> SynthSparse(const DepthGrid& dense,
                                             const SparsitySpec& spec);

}  // namespace depthfuse

#endif  // DEPTHFUSE_IO_H_
