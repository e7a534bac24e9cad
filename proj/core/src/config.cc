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

#include "depthfuse/config.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "depthfuse/error.h"

namespace depthfuse {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class LineError {
 public:
  explicit LineError(int line) : line_(line) {}
  [[noreturn]] void operator()(const std::string& what) const {
    throw Error(ErrorCode::kConfig,
                "config line " + std::to_string(line_) + ": " + what);
  }

 private:
  int line_;
};

double ParseDouble(std::string_view token, const LineError& fail) {
  token = Trim(token);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail("not a number: '" + std::string(token) + "'");
  }
  return value;
}

int ParseInt(std::string_view token, const LineError& fail) {
  token = Trim(token);
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail("not an integer: '" + std::string(token) + "'");
  }
  return value;
}

bool ParseBool(std::string_view token, const LineError& fail) {
  token = Trim(token);
  if (token == "true" || token == "1" || token == "on") return true;
  if (token == "false" || token == "0" || token == "off") return false;
  fail("not a boolean: '" + std::string(token) + "'");
}

template <typename T, typename Parse>
std::vector<T> ParseList(std::string_view value, const LineError& fail,
                         Parse parse) {
  std::vector<T> out;
  if (Trim(value).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = value.find(',', start);
    out.push_back(parse(value.substr(start, comma - start), fail));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string FormatNumber(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
std::string JoinList(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) {
      out += FormatNumber(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

struct PendingMatrix {
  std::vector<double> values;
  std::vector<int> shape;
  int values_line = 0;
  int shape_line = 0;
  bool has_values = false;
  bool has_shape = false;
};

Matrix ResolveMatrix(const PendingMatrix& pending, const char* name) {
  const LineError fail(pending.has_values ? pending.values_line
                                          : pending.shape_line);
  if (!pending.has_shape) {
    fail(std::string(name) + " needs a declared shape (" + name + ".shape)");
  }
  if (!pending.has_values) {
    fail(std::string(name) + ".shape given without " + name);
  }
  if (pending.shape.size() != 2 || pending.shape[0] < 1 ||
      pending.shape[1] < 1) {
    fail(std::string(name) + ".shape must be two positive integers");
  }
  const std::size_t expected =
      static_cast<std::size_t>(pending.shape[0]) * pending.shape[1];
  if (pending.values.size() != expected) {
    fail(std::string(name) + " has " + std::to_string(pending.values.size()) +
         " values but its shape declares " + std::to_string(expected));
  }
  return Matrix{pending.shape[0], pending.shape[1], pending.values};
}

}  // namespace

void RunConfig::Validate() const {
  if (!(d_max > 0.0)) {
    throw Error(ErrorCode::kConfig, "d_max must be positive");
  }
  cg.Validate();
  refine.Validate();
}

void RunConfig::RequireInputPathsExist() const {
  std::string missing;
  for (const auto& [key, path] : paths) {
    if (key.rfind("out", 0) == 0) continue;
    if (!std::filesystem::exists(path)) {
      if (!missing.empty()) missing += ", ";
      missing += key + "=" + path.string();
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kIo, "missing input file(s): " + missing);
  }
}

RunConfig ParseConfig(std::string_view text) {
  RunConfig config;
  PendingMatrix w_f;
  PendingMatrix g;
  bool kernels_set = false;
  bool g_bias_set = false;
  std::set<std::string> seen;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;

    const LineError fail(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    const std::string key(Trim(line.substr(0, eq)));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (!seen.insert(key).second) fail("duplicate key '" + key + "'");

    RefineParams& rp = config.refine;
    if (key == "d_max") {
      config.d_max = ParseDouble(value, fail);
    } else if (key == "align") {
      config.align = ParseBool(value, fail);
    } else if (key == "cg.tol") {
      config.cg.rel_tolerance = ParseDouble(value, fail);
    } else if (key == "cg.max_iter") {
      config.cg.max_iterations = ParseInt(value, fail);
    } else if (key == "refine.kappa") {
      rp.kappa = ParseDouble(value, fail);
    } else if (key == "refine.kernel_sizes") {
      rp.kernel_sizes = ParseList<int>(value, fail, ParseInt);
      kernels_set = true;
    } else if (key == "refine.temperatures") {
      rp.temperatures = ParseList<double>(value, fail, ParseDouble);
    } else if (key == "refine.iterations") {
      rp.iterations = ParseInt(value, fail);
    } else if (key == "refine.w_f") {
      w_f.values = ParseList<double>(value, fail, ParseDouble);
      w_f.has_values = true;
      w_f.values_line = line_no;
    } else if (key == "refine.w_f.shape") {
      w_f.shape = ParseList<int>(value, fail, ParseInt);
      w_f.has_shape = true;
      w_f.shape_line = line_no;
    } else if (key == "refine.g") {
      g.values = ParseList<double>(value, fail, ParseDouble);
      g.has_values = true;
      g.values_line = line_no;
    } else if (key == "refine.g.shape") {
      g.shape = ParseList<int>(value, fail, ParseInt);
      g.has_shape = true;
      g.shape_line = line_no;
    } else if (key == "refine.g_bias") {
      rp.g_bias = ParseList<double>(value, fail, ParseDouble);
      g_bias_set = true;
    } else if (key == "refine.w_alpha") {
      rp.w_alpha = ParseList<double>(value, fail, ParseDouble);
    } else if (key == "refine.w_alpha_bias") {
      rp.w_alpha_bias = ParseDouble(value, fail);
    } else if (key.rfind("paths.", 0) == 0 && key.size() > 6) {
      if (value.empty()) fail("empty path for '" + key + "'");
      config.paths[key.substr(6)] = std::filesystem::path(std::string(value));
    } else {
      fail("unknown key '" + key + "'");
    }
  }

  RefineParams& rp = config.refine;
  if (w_f.has_values || w_f.has_shape) rp.w_f = ResolveMatrix(w_f, "refine.w_f");
  if (g.has_values || g.has_shape) {
    rp.g = ResolveMatrix(g, "refine.g");
  } else if (kernels_set || rp.g.cols != rp.channels()) {
    rp.g = Matrix::Zeros(static_cast<int>(rp.kernel_sizes.size()),
                         rp.channels());
  }
  if (!g_bias_set && kernels_set) rp.g_bias.assign(rp.kernel_sizes.size(), 0.0);
  rp.d_max = config.d_max;

  try {
    config.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid config: ") + e.what());
  }
  return config;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

std::string FormatConfig(const RunConfig& config) {
  const RefineParams& rp = config.refine;
  std::ostringstream out;
  out << "d_max = " << FormatNumber(config.d_max) << '\n'
      << "align = " << (config.align ? "true" : "false") << '\n'
      << "cg.tol = " << FormatNumber(config.cg.rel_tolerance) << '\n';
  if (config.cg.max_iterations) {
    out << "cg.max_iter = " << *config.cg.max_iterations << '\n';
  }
  out << "refine.kappa = " << FormatNumber(rp.kappa) << '\n'
      << "refine.kernel_sizes = " << JoinList(rp.kernel_sizes) << '\n'
      << "refine.temperatures = " << JoinList(rp.temperatures) << '\n'
      << "refine.iterations = " << rp.iterations << '\n'
      << "refine.w_f.shape = " << rp.w_f.rows << ", " << rp.w_f.cols << '\n'
      << "refine.w_f = " << JoinList(rp.w_f.values) << '\n'
      << "refine.g.shape = " << rp.g.rows << ", " << rp.g.cols << '\n'
      << "refine.g = " << JoinList(rp.g.values) << '\n'
      << "refine.g_bias = " << JoinList(rp.g_bias) << '\n'
      << "refine.w_alpha = " << JoinList(rp.w_alpha) << '\n'
      << "refine.w_alpha_bias = " << FormatNumber(rp.w_alpha_bias) << '\n';
  for (const auto& [key, path] : config.paths) {
    out << "paths." << key << " = " << path.string() << '\n';
  }
  return out.str();
}

}  // namespace depthfuse
