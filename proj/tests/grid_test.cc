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

#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <set>

#include "depthfuse/error.h"
#include "test_support.h"

namespace depthfuse {
namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected depthfuse::Error";
  return ErrorCode::kIo;
}

TEST(DepthGridTest, RejectsNonFiniteAndWrongLength) {
  EXPECT_EQ(CodeOf([] {
              DepthGrid(2, 2, {1.0, 2.0,
                               std::numeric_limits<double>::quiet_NaN(), 4.0});
            }),
            ErrorCode::kNonFiniteValue);
  EXPECT_EQ(CodeOf([] { DepthGrid(2, 2, {1.0, 2.0, 3.0}); }),
            ErrorCode::kLengthMismatch);
}

TEST(DepthGridTest, ValidDepthRequiresNonNegative) {
  EXPECT_TRUE(IsValidDepth(DepthGrid(3, 3, 0.0)));
  EXPECT_FALSE(IsValidDepth(DepthGrid(3, 3, -0.5)));
}

TEST(BuildPartitionTest, BorderOnlyThreeByThree) {
  const IndexPartition p = BuildPartition(DepthGrid(3, 3, 0.0));
  EXPECT_EQ(p.known.size(), 8u);
  ASSERT_EQ(p.unknown.size(), 1u);
  EXPECT_EQ(p.unknown[0], (Pixel{1, 1}));
  EXPECT_EQ(p.unknown_index_of[4], 0);
}

TEST(BuildPartitionTest, FullyConstrainedThreeByThree) {
  DepthGrid sparse(3, 3, 0.0);
  sparse(1, 1) = 5.0;
  const IndexPartition p = BuildPartition(sparse);
  EXPECT_TRUE(p.unknown.empty());
  EXPECT_EQ(p.known.size(), 9u);
}

TEST(BuildPartitionTest, FiveByFiveTwoAnchors) {
  // 16 border pixels + 2 anchors known; 9 interior - 2 anchors unknown.
  DepthGrid sparse(5, 5, 0.0);
  sparse(1, 2) = 3.0;
  sparse(3, 3) = 4.0;
  const IndexPartition p = BuildPartition(sparse);
  EXPECT_EQ(p.known.size(), 18u);
  EXPECT_EQ(p.unknown.size(), 7u);
}

TEST(BuildPartitionTest, RejectsTooSmall) {
  EXPECT_EQ(CodeOf([] { BuildPartition(DepthGrid(2, 5, 0.0)); }),
            ErrorCode::kDimensionTooSmall);
  EXPECT_EQ(CodeOf([] { BuildPartition(DepthGrid(5, 2, 0.0)); }),
            ErrorCode::kDimensionTooSmall);
}

TEST(BuildPartitionTest, InvariantsOnRandomGrids) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 3 + static_cast<int>(rng() % 12);
    const int w = 3 + static_cast<int>(rng() % 12);
    const DepthGrid sparse = testing::RandomSparse(rng, h, w, 0.2);
    const IndexPartition p = BuildPartition(sparse);

    EXPECT_EQ(p.known.size() + p.unknown.size(),
              static_cast<std::size_t>(h) * w);
    std::set<std::pair<int, int>> known;
    for (const Pixel& q : p.known) known.insert({q.row, q.col});
    EXPECT_EQ(known.size(), p.known.size());
    for (std::size_t i = 0; i < p.unknown.size(); ++i) {
      const Pixel& q = p.unknown[i];
      EXPECT_FALSE(known.count({q.row, q.col}));
      EXPECT_GT(q.row, 0);
      EXPECT_GT(q.col, 0);
      EXPECT_LT(q.row, h - 1);
      EXPECT_LT(q.col, w - 1);
      EXPECT_EQ(sparse(q.row, q.col), 0.0);
      EXPECT_EQ(p.unknown_index_of[sparse.Index(q.row, q.col)],
                static_cast<int>(i));
      if (i > 0) {
        const Pixel& prev = p.unknown[i - 1];
        EXPECT_TRUE(prev.row < q.row || (prev.row == q.row && prev.col < q.col));
      }
    }
    // Deterministic ordering.
    const IndexPartition again = BuildPartition(sparse);
    EXPECT_EQ(again.unknown, p.unknown);
    EXPECT_EQ(again.known, p.known);
  }
}

TEST(DirichletFieldTest, AnchorBorderAndInterior) {
  DepthGrid sparse(5, 5, 0.0);
  sparse(2, 2) = 7.3;
  const DepthGrid prior(5, 5, 1.0);
  const IndexPartition p = BuildPartition(sparse);
  const DepthGrid v = AssembleDirichletField(sparse, prior, p);
  EXPECT_EQ(v(2, 2), 7.3);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(v(0, i), 1.0);
    EXPECT_EQ(v(4, i), 1.0);
    EXPECT_EQ(v(i, 0), 1.0);
    EXPECT_EQ(v(i, 4), 1.0);
  }
  EXPECT_EQ(v(1, 1), 0.0);
  EXPECT_EQ(v(3, 2), 0.0);
}

TEST(DirichletFieldTest, MeasurementWinsOnBorder) {
  DepthGrid sparse(4, 4, 0.0);
  sparse(0, 1) = 9.5;
  const DepthGrid prior(4, 4, 2.0);
  const DepthGrid v = AssembleDirichletField(sparse, prior, BuildPartition(sparse));
  EXPECT_EQ(v(0, 1), 9.5);

  // When the two agree, both branches give the same value.
  DepthGrid agree = prior;
  agree(0, 1) = 9.5;
  const DepthGrid v2 = AssembleDirichletField(sparse, agree, BuildPartition(sparse));
  EXPECT_EQ(v2(0, 1), 9.5);
}

TEST(DirichletFieldTest, EmptySparseGivesPriorBorder) {
  std::mt19937_64 rng(3);
  const DepthGrid prior = testing::RandomGrid(rng, 6, 7, 1.0, 5.0);
  const DepthGrid sparse(6, 7, 0.0);
  const DepthGrid v = AssembleDirichletField(sparse, prior, BuildPartition(sparse));
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 7; ++c) {
      const bool border = r == 0 || c == 0 || r == 5 || c == 6;
      EXPECT_EQ(v(r, c), border ? prior(r, c) : 0.0);
    }
  }
}

TEST(DirichletFieldTest, KnownValuesIgnoreUnknownInputs) {
  std::mt19937_64 rng(5);
  const DepthGrid sparse = testing::RandomSparse(rng, 8, 8, 0.3);
  DepthGrid prior = testing::RandomGrid(rng, 8, 8, 1.0, 5.0);
  const IndexPartition p = BuildPartition(sparse);
  const DepthGrid before = AssembleDirichletField(sparse, prior, p);
  for (const Pixel& q : p.unknown) prior(q.row, q.col) = 1e6;
  EXPECT_EQ(AssembleDirichletField(sparse, prior, p), before);
}

TEST(DirichletFieldTest, RejectsMismatch) {
  const DepthGrid sparse(4, 4, 0.0);
  EXPECT_EQ(CodeOf([&] {
              AssembleDirichletField(sparse, DepthGrid(4, 5, 1.0),
                                     BuildPartition(sparse));
            }),
            ErrorCode::kDimensionMismatch);
}

}  // namespace
}  // namespace depthfuse
