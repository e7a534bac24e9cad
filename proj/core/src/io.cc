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

#include "depthfuse/io.h"

#include <png.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>

#include "depthfuse/error.h"

namespace depthfuse {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenFile(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string() + ": " +
                                    std::strerror(errno));
  }
  return f;
}

struct PngErrorState {
  std::jmp_buf jump;
  char message[256] = {};
};

void OnPngError(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  std::longjmp(state->jump, 1);
}

void OnPngWarning(png_structp, png_const_charp) {}

// Decoded grayscale samples, widened to 16 bits regardless of source depth.
struct GraySamples {
  int height = 0;
  int width = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

enum class PngReadStatus { kOk, kLibpngError, kNotGray };

PngReadStatus ReadGrayPngRaw(std::FILE* file, GraySamples* out,
                             PngErrorState* err, int* color_type_out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err,
                                           OnPngError, OnPngWarning);
  if (!png) return PngReadStatus::kLibpngError;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return PngReadStatus::kLibpngError;
  }
  // Declared before setjmp so a longjmp back here leaves them destructible.
  std::vector<png_byte> rows_storage;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(err->jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return PngReadStatus::kLibpngError;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  *color_type_out = color_type;
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    out->bit_depth = bit_depth;
    return PngReadStatus::kNotGray;
  }
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  rows_storage.resize(rowbytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) {
    row_ptrs[r] = rows_storage.data() + r * rowbytes;
  }
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out->height = static_cast<int>(height);
  out->width = static_cast<int>(width);
  out->bit_depth = bit_depth;
  out->samples.resize(static_cast<std::size_t>(width) * height);
  const bool wide = bit_depth == 16;
  for (png_uint_32 r = 0; r < height; ++r) {
    const png_byte* row = row_ptrs[r];
    for (png_uint_32 c = 0; c < width; ++c) {
      out->samples[static_cast<std::size_t>(r) * width + c] =
          wide ? static_cast<std::uint16_t>((row[2 * c] << 8) | row[2 * c + 1])
               : row[c];
    }
  }
  return PngReadStatus::kOk;
}

GraySamples ReadGrayPng(const std::filesystem::path& path) {
  FilePtr file = OpenFile(path, "rb");
  png_byte signature[8] = {};
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0) {
    throw Error(ErrorCode::kIo, path.string() + " is not a PNG file");
  }
  std::rewind(file.get());
  GraySamples samples;
  PngErrorState err;
  int color_type = 0;
  switch (ReadGrayPngRaw(file.get(), &samples, &err, &color_type)) {
    case PngReadStatus::kOk:
      return samples;
    case PngReadStatus::kNotGray:
      throw Error(ErrorCode::kWrongChannelCount,
                  path.string() + " is not a single-channel grayscale PNG "
                                  "(color type " +
                      std::to_string(color_type) + ")");
    case PngReadStatus::kLibpngError:
      break;
  }
  throw Error(ErrorCode::kIo, "cannot decode " + path.string() + ": " +
                                  std::string(err.message));
}

bool WriteGrayPngRaw(std::FILE* file, int height, int width, int bit_depth,
                     const std::vector<png_byte>* bytes, PngErrorState* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err,
                                            OnPngError, OnPngWarning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(err->jump)) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes =
      static_cast<std::size_t>(width) * (bit_depth / 8);
  for (int r = 0; r < height; ++r) {
    png_write_row(png, bytes->data() + static_cast<std::size_t>(r) * rowbytes);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void WriteGrayPng(const std::filesystem::path& path, int height, int width,
                  int bit_depth, const std::vector<png_byte>& bytes) {
  if (height < 1 || width < 1) {
    throw Error(ErrorCode::kInvalidParameter,
                "cannot write an empty raster to " + path.string());
  }
  FilePtr file = OpenFile(path, "wb");
  PngErrorState err;
  if (!WriteGrayPngRaw(file.get(), height, width, bit_depth, &bytes, &err)) {
    throw Error(ErrorCode::kIo, "cannot encode " + path.string() + ": " +
                                    std::string(err.message));
  }
  if (std::fflush(file.get()) != 0) {
    throw Error(ErrorCode::kIo, "cannot flush " + path.string());
  }
}

std::uint32_t LoadU32(const std::byte* p, bool little_endian) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const int shift = little_endian ? 8 * i : 8 * (3 - i);
    v |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(p[i]))
         << shift;
  }
  return v;
}

void StoreU32(std::uint32_t v, std::byte* p, bool little_endian) {
  for (int i = 0; i < 4; ++i) {
    const int shift = little_endian ? 8 * i : 8 * (3 - i);
    p[i] = static_cast<std::byte>((v >> shift) & 0xFFu);
  }
}

[[noreturn]] void MalformedPfm(const std::string& why) {
  throw Error(ErrorCode::kMalformedHeader, "malformed PFM header: " + why);
}

std::uint64_t SplitMix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint16_t DepthPngCodec::Encode(double meters) {
  if (!std::isfinite(meters)) {
    throw Error(ErrorCode::kNonFiniteValue, "cannot encode non-finite depth");
  }
  if (meters > kMaxDepth) {
    throw Error(ErrorCode::kOutOfRange,
                "depth " + std::to_string(meters) +
                    " m exceeds the 16-bit PNG maximum of 255.99609375 m");
  }
  if (meters <= 0.0) return kInvalidCode;
  const double code = std::round(meters * kScale);
  return static_cast<std::uint16_t>(std::min(code, 65535.0));
}

CodeRaster ReadPng16(const std::filesystem::path& path) {
  GraySamples samples = ReadGrayPng(path);
  if (samples.bit_depth != 16) {
    throw Error(ErrorCode::kWrongBitDepth,
                path.string() + " has bit depth " +
                    std::to_string(samples.bit_depth) + ", expected 16");
  }
  return {samples.height, samples.width, std::move(samples.samples)};
}

void WritePng16(const CodeRaster& raster, const std::filesystem::path& path) {
  if (raster.codes.size() !=
      static_cast<std::size_t>(raster.height) * raster.width) {
    throw Error(ErrorCode::kLengthMismatch, "code raster size mismatch");
  }
  std::vector<png_byte> bytes(raster.codes.size() * 2);
  for (std::size_t i = 0; i < raster.codes.size(); ++i) {
    bytes[2 * i] = static_cast<png_byte>(raster.codes[i] >> 8);
    bytes[2 * i + 1] = static_cast<png_byte>(raster.codes[i] & 0xFF);
  }
  WriteGrayPng(path, raster.height, raster.width, 16, bytes);
}

DepthGrid ReadDepthPng(const std::filesystem::path& path) {
  const CodeRaster raster = ReadPng16(path);
  std::vector<double> values(raster.codes.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = DepthPngCodec::Decode(raster.codes[i]);
  }
  return DepthGrid(raster.height, raster.width, std::move(values));
}

void WriteDepthPng(const DepthGrid& grid, const std::filesystem::path& path) {
  CodeRaster raster{grid.height(), grid.width(), {}};
  raster.codes.reserve(grid.size());
  for (double v : grid.values()) raster.codes.push_back(DepthPngCodec::Encode(v));
  WritePng16(raster, path);
}

BinaryMask ReadMaskPng(const std::filesystem::path& path) {
  const GraySamples samples = ReadGrayPng(path);
  BinaryMask mask(samples.height, samples.width, false);
  for (std::size_t i = 0; i < samples.samples.size(); ++i) {
    mask.Set(i, samples.samples[i] != 0);
  }
  return mask;
}

void WriteMaskPng(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<png_byte> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  WriteGrayPng(path, mask.height(), mask.width(), 8, bytes);
}

DepthGrid DecodePfm(std::span<const std::byte> bytes) {
  std::size_t pos = 0;
  auto is_space = [](std::byte b) {
    const auto c = std::to_integer<unsigned char>(b);
    return c == ' ' || c == '\n' || c == '\r' || c == '\t';
  };
  auto next_token = [&]() {
    while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
    std::string token;
    while (pos < bytes.size() && !is_space(bytes[pos])) {
      token.push_back(static_cast<char>(bytes[pos++]));
      if (token.size() > 64) MalformedPfm("oversized header token");
    }
    if (token.empty()) MalformedPfm("truncated header");
    return token;
  };

  const std::string magic = next_token();
  if (magic == "PF") MalformedPfm("color PFM (PF) is not a single-channel raster");
  if (magic != "Pf") MalformedPfm("bad magic '" + magic + "'");

  auto parse_int = [&](const std::string& token, const char* what) {
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(token, &used);
    } catch (const std::exception&) {
      MalformedPfm(std::string("unparsable ") + what);
    }
    if (used != token.size() || value < 1 || value > (1 << 20)) {
      MalformedPfm(std::string("invalid ") + what + " '" + token + "'");
    }
    return static_cast<int>(value);
  };
  const int width = parse_int(next_token(), "width");
  const int height = parse_int(next_token(), "height");

  const std::string scale_token = next_token();
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_token, &used);
    if (used != scale_token.size()) MalformedPfm("invalid scale");
  } catch (const std::exception&) {
    MalformedPfm("unparsable scale '" + scale_token + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) MalformedPfm("zero scale");
  if (pos >= bytes.size() || !is_space(bytes[pos])) {
    MalformedPfm("missing separator before payload");
  }
  ++pos;

  const bool little_endian = scale < 0.0;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos < count * 4) {
    MalformedPfm("payload holds " + std::to_string((bytes.size() - pos) / 4) +
                 " floats, expected " + std::to_string(count));
  }

  std::vector<double> values(count);
  for (int file_row = 0; file_row < height; ++file_row) {
    const int row = height - 1 - file_row;
    for (int c = 0; c < width; ++c) {
      const std::byte* p =
          bytes.data() + pos +
          (static_cast<std::size_t>(file_row) * width + c) * 4;
      const float v = std::bit_cast<float>(LoadU32(p, little_endian));
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteValue,
                    "non-finite PFM sample at row " + std::to_string(row) +
                        ", column " + std::to_string(c));
      }
      values[static_cast<std::size_t>(row) * width + c] = v;
    }
  }
  return DepthGrid(height, width, std::move(values));
}

std::vector<std::byte> EncodePfm(const DepthGrid& grid, bool little_endian) {
  if (grid.empty()) {
    throw Error(ErrorCode::kInvalidParameter, "cannot encode an empty raster");
  }
  const std::string header = "Pf\n" + std::to_string(grid.width()) + " " +
                             std::to_string(grid.height()) + "\n" +
                             (little_endian ? "-1.0" : "1.0") + "\n";
  std::vector<std::byte> out(header.size() + grid.size() * 4);
  std::memcpy(out.data(), header.data(), header.size());
  std::byte* payload = out.data() + header.size();
  for (int file_row = 0; file_row < grid.height(); ++file_row) {
    const int row = grid.height() - 1 - file_row;
    for (int c = 0; c < grid.width(); ++c) {
      const double v = grid(row, c);
      const float f = static_cast<float>(v);
      if (!std::isfinite(f)) {
        throw Error(ErrorCode::kOutOfRange,
                    "value " + std::to_string(v) + " overflows a 32-bit float");
      }
      StoreU32(std::bit_cast<std::uint32_t>(f),
               payload + (static_cast<std::size_t>(file_row) * grid.width() + c) * 4,
               little_endian);
    }
  }
  return out;
}

DepthGrid ReadFloatRaster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return DecodePfm(std::as_bytes(std::span<const char>(raw)));
}

void WriteFloatRaster(const DepthGrid& grid,
                      const std::filesystem::path& path) {
  const std::vector<std::byte> bytes = EncodePfm(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

Xorshift64Star::Xorshift64Star(std::uint64_t seed) {
  std::uint64_t s = seed;
  state_ = SplitMix64(s);
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
}

std::uint64_t Xorshift64Star::Next() {
  std::uint64_t x = state_;
  x ^= x >> 12;
  x ^= x << 25;
  x ^= x >> 27;
  state_ = x;
  return x * 0x2545F4914F6CDD1Dull;
}

std::uint64_t Xorshift64Star::Below(std::uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorCode::kInvalidParameter, "empty sampling range");
  }
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = Next();
    if (r >= threshold) return r % bound;
  }
}

double Xorshift64Star::Uniform() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

void SparsitySpec::Validate(int height, int width) const {
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  switch (mode) {
    case SparsityMode::kUniformRandom:
    case SparsityMode::kEveryNthRow:
      if (!(density > 0.0 && density <= 1.0)) {
        throw Error(ErrorCode::kInvalidParameter,
                    "sparsity density must lie in (0, 1]");
      }
      break;
    case SparsityMode::kFixedCount:
      if (count < 1) {
        throw Error(ErrorCode::kInvalidParameter,
                    "fixed-count sparsity needs count >= 1");
      }
      if (count > pixels) {
        throw Error(ErrorCode::kCountExceedsPixels,
                    "sample count " + std::to_string(count) + " exceeds " +
                        std::to_string(pixels) + " pixels");
      }
      break;
  }
}

std::pair<DepthGrid, BinaryMask> SynthSparse(const DepthGrid& dense,
                                             const SparsitySpec& spec) {
  const int h = dense.height();
  const int w = dense.width();
  if (dense.empty()) {
    throw Error(ErrorCode::kDimensionTooSmall, "cannot sample an empty raster");
  }
  spec.Validate(h, w);
  const std::size_t pixels = dense.size();
  Xorshift64Star rng(spec.seed);
  std::vector<char> selected(pixels, 0);

  auto pick_uniform = [&](std::size_t k) {
    // Partial Fisher-Yates: the first k slots become the sample.
    std::vector<std::size_t> order(pixels);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.Below(pixels - i);
      std::swap(order[i], order[j]);
      selected[order[i]] = 1;
    }
  };

  switch (spec.mode) {
    case SparsityMode::kUniformRandom: {
      const auto k = static_cast<std::size_t>(
          std::llround(spec.density * static_cast<double>(pixels)));
      pick_uniform(std::clamp<std::size_t>(k, 1, pixels));
      break;
    }
    case SparsityMode::kFixedCount:
      pick_uniform(spec.count);
      break;
    case SparsityMode::kEveryNthRow: {
      const auto stride = static_cast<std::uint64_t>(
          std::max<long long>(1, std::llround(1.0 / spec.density)));
      const std::uint64_t phase = rng.Below(stride);
      for (int r = 0; r < h; ++r) {
        if (static_cast<std::uint64_t>(r) % stride != phase) continue;
        for (int c = 0; c < w; ++c) selected[dense.Index(r, c)] = 1;
      }
      break;
    }
  }

  DepthGrid sparse(h, w, 0.0);
  BinaryMask mask(h, w, false);
  for (std::size_t i = 0; i < pixels; ++i) {
    if (selected[i] && dense[i] > 0.0) {
      sparse[i] = dense[i];
      mask.Set(i, true);
    }
  }
  return {std::move(sparse), std::move(mask)};
}

}  // namespace depthfuse
