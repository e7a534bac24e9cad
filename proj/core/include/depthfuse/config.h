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

#ifndef DEPTHFUSE_CONFIG_H_
#define DEPTHFUSE_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "depthfuse/metrics.h"
#include "depthfuse/poisson.h"
#include "depthfuse/refine.h"

namespace depthfuse {

// Channel count of HandcraftedFeatures, which the CLI feeds to Refine.
inline constexpr int kHandcraftedChannels = 5;

struct RunConfig {
  double d_max = kKittiMaxDepth;
  CgSettings cg;
  RefineParams refine = RefineParams::Defaults(kHandcraftedChannels);
  bool align = false;
  // Named input/output locations ("sparse", "prior", "out", ...).
  std::map<std::string, std::filesystem::path> paths;

  void Validate() const;
  // Throws kIo naming every entry whose key does not start with "out" and
  // whose file is missing.
  void RequireInputPathsExist() const;
};

// Flat `key = value` text with dotted sections; '#' starts a comment.
//
//   d_max = 90
//   align = false
//   cg.tol = 1e-8
//   cg.max_iter = 2000
//   refine.kappa = 1
//   refine.kernel_sizes = 3, 5, 7
//   refine.temperatures = 0.1, 0.2, 0.4
//   refine.iterations = 6
//   refine.w_f.shape = 5, 5        # embed_dim, channels
//   refine.w_f = 1, 0, 0, ...      # row-major
//   refine.g.shape = 3, 5          # kernels, channels
//   refine.g = ...
//   refine.g_bias = 0, 0, 0
//   refine.w_alpha = 0, 0, 0, 0, 0
//   refine.w_alpha_bias = 2.1972245773362196
//   paths.sparse = scene/sparse.png
//
// Unknown keys, duplicate keys and shape mismatches throw kConfig with the
// offending line number.
RunConfig ParseConfig(std::string_view text);
RunConfig LoadConfig(const std::filesystem::path& path);

// Inverse of ParseConfig (round-trips every field at full precision).
std::string FormatConfig(const RunConfig& config);

}  // namespace depthfuse

#endif  // DEPTHFUSE_CONFIG_H_
