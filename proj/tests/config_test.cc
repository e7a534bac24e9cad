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

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "depthfuse/error.h"
#include "test_support.h"

namespace depthfuse {
namespace {

std::string MessageOf(std::string_view text) {
  try {
    ParseConfig(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    return e.what();
  }
  ADD_FAILURE() << "expected a config error";
  return {};
}

TEST(ParseConfigTest, EmptyTextGivesDefaults) {
  const RunConfig c = ParseConfig("");
  EXPECT_EQ(c.d_max, 90.0);
  EXPECT_FALSE(c.align);
  EXPECT_EQ(c.cg.rel_tolerance, 1e-8);
  EXPECT_FALSE(c.cg.max_iterations.has_value());
  EXPECT_EQ(c.refine.channels(), kHandcraftedChannels);
  EXPECT_EQ(c.refine.kernel_sizes, (std::vector<int>{3, 5, 7}));
  EXPECT_EQ(c.refine.iterations, 6);
}

TEST(ParseConfigTest, ReadsAllScalarKeys) {
  const RunConfig c = ParseConfig(R"(
    # comment line
    d_max = 10          # NYU
    align = true
    cg.tol = 1e-6
    cg.max_iter = 500
    refine.kappa = 0.5
    refine.kernel_sizes = 3, 5
    refine.temperatures = 0.2, 0.3
    refine.iterations = 2
    refine.w_alpha_bias = 40
    paths.sparse = scene/sparse.png
  )");
  EXPECT_EQ(c.d_max, 10.0);
  EXPECT_EQ(c.refine.d_max, 10.0);
  EXPECT_TRUE(c.align);
  EXPECT_EQ(c.cg.rel_tolerance, 1e-6);
  EXPECT_EQ(c.cg.max_iterations, 500);
  EXPECT_EQ(c.refine.kappa, 0.5);
  EXPECT_EQ(c.refine.kernel_sizes, (std::vector<int>{3, 5}));
  EXPECT_EQ(c.refine.g.rows, 2);
  EXPECT_EQ(c.refine.g_bias.size(), 2u);
  EXPECT_EQ(c.refine.iterations, 2);
  EXPECT_EQ(c.refine.w_alpha_bias, 40.0);
  EXPECT_EQ(c.paths.at("sparse"), "scene/sparse.png");
}

TEST(ParseConfigTest, Matrices) {
  const RunConfig c = ParseConfig(
      "refine.w_f.shape = 2, 5\n"
      "refine.w_f = 1,0,0,0,0, 0,1,0,0,0\n"
      "refine.g.shape = 3, 5\n"
      "refine.g = 1,2,3,4,5, 0,0,0,0,0, -1,-2,-3,-4,-5\n");
  EXPECT_EQ(c.refine.embed_dim(), 2);
  EXPECT_EQ(c.refine.channels(), 5);
  EXPECT_EQ(c.refine.g(2, 4), -5.0);
}

TEST(ParseConfigTest, ErrorsNameTheLine) {
  EXPECT_NE(MessageOf("d_max = 9\nbogus = 1\n").find("line 2"), std::string::npos);
  EXPECT_NE(MessageOf("cg.tol = 1e-8\n\ncg.tol = 1e-6\n").find("line 3"),
            std::string::npos);
  EXPECT_NE(MessageOf("refine.kappa = abc").find("line 1"), std::string::npos);
  EXPECT_NE(MessageOf("no equals sign").find("line 1"), std::string::npos);
  EXPECT_NE(MessageOf("refine.w_f.shape = 2, 5\nrefine.w_f = 1, 2\n").find("line"),
            std::string::npos);
  MessageOf("refine.iterations = 0");
  MessageOf("refine.kernel_sizes = 3, 5, 7\nrefine.temperatures = 0.1\n");
  MessageOf("d_max = -1");
  MessageOf("align = maybe");
}

TEST(FormatConfigTest, RoundTrips) {
  std::mt19937_64 rng(1);
  RunConfig c;
  c.d_max = 10.0;
  c.align = true;
  c.cg.rel_tolerance = 3.3e-9;
  c.cg.max_iterations = 123;
  c.refine = testing::RandomParams(rng, 5, 4);
  c.refine.d_max = 10.0;
  c.paths["prior"] = "a/b.pfm";
  c.paths["out"] = "c.png";
  const RunConfig back = ParseConfig(FormatConfig(c));
  EXPECT_EQ(FormatConfig(back), FormatConfig(c));
  EXPECT_EQ(back.refine.w_f.values, c.refine.w_f.values);
  EXPECT_EQ(back.refine.temperatures, c.refine.temperatures);
  EXPECT_EQ(back.refine.w_alpha_bias, c.refine.w_alpha_bias);
  EXPECT_EQ(back.cg.max_iterations, 123);
}

TEST(RunConfigTest, MissingInputsAreListed) {
  const auto dir = testing::ScratchDir("config_paths");
  std::ofstream(dir / "present.png") << "x";
  RunConfig c;
  c.paths["sparse"] = dir / "present.png";
  c.paths["prior"] = dir / "absent.pfm";
  c.paths["gt"] = dir / "also_absent.png";
  c.paths["out"] = dir / "not_yet.png";
  try {
    c.RequireInputPathsExist();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("absent.pfm"), std::string::npos);
    EXPECT_NE(msg.find("also_absent.png"), std::string::npos);
    EXPECT_EQ(msg.find("not_yet"), std::string::npos);
  }
}

TEST(LoadConfigTest, MissingFile) {
  try {
    LoadConfig("/nonexistent/depthfuse.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

}  // namespace
}  // namespace depthfuse
