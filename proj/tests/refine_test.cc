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

#include "depthfuse/refine.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "depthfuse/error.h"
#include "depthfuse/oracle.h"
#include "test_support.h"

namespace depthfuse {
namespace {

using testing::MaxAbsDiff;
using testing::RandomFeatures;
using testing::RandomGrid;
using testing::RandomMask;
using testing::RandomParams;

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected depthfuse::Error";
  return ErrorCode::kIo;
}

double Norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

std::vector<double> RandomBallPoint(std::mt19937_64& rng, int dim,
                                    double kappa, double max_fraction) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, max_fraction);
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (double& x : v) x = gauss(rng);
  const double scale = u(rng) / (std::sqrt(kappa) * Norm(v));
  for (double& x : v) x *= scale;
  return v;
}

// Single-kernel stack with every in-grid neighbour weighted equally.
AffinityStack UniformStack(int h, int w, int size) {
  AffinityStack stack(h, w, {size});
  const int half = size / 2;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int members = 0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          members += r + dy >= 0 && r + dy < h && c + dx >= 0 && c + dx < w;
        }
      }
      auto win = stack.window(0, r, c);
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          const bool in = r + dy >= 0 && r + dy < h && c + dx >= 0 && c + dx < w;
          win[(dy + half) * size + (dx + half)] = in ? 1.0 / members : 0.0;
        }
      }
      stack.gate(0, r, c) = 1.0;
    }
  }
  return stack;
}

TEST(ExpMapOriginTest, FixesOrigin) {
  const std::vector<double> zero(4, 0.0);
  EXPECT_EQ(ExpMapOrigin(zero, 1.0), zero);
}

TEST(ExpMapOriginTest, ScalarTanh) {
  const std::vector<double> v = {0.5, 0.0};
  const auto h = ExpMapOrigin(v, 1.0);
  EXPECT_NEAR(h[0], std::tanh(0.5), 1e-15);
  EXPECT_NEAR(h[0], 0.4621, 1e-4);
  EXPECT_EQ(h[1], 0.0);
}

TEST(ExpMapOriginTest, SaturatesInsideBall) {
  for (double kappa : {0.1, 1.0, 10.0}) {
    const std::vector<double> v = {30.0, -40.0};  // norm 50
    const auto h = ExpMapOrigin(v, kappa);
    EXPECT_LT(std::sqrt(kappa) * Norm(h), 1.0);
  }
}

TEST(MobiusAddTest, ZeroIsIdentity) {
  const std::vector<double> zero = {0.0, 0.0, 0.0};
  const std::vector<double> y = {0.1, -0.3, 0.2};
  EXPECT_EQ(MobiusAdd(zero, y, 1.0), y);
  EXPECT_EQ(MobiusAdd(y, zero, 1.0), y);
}

TEST(PoincareDistanceTest, SelfDistanceIsZero) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto x = RandomBallPoint(rng, 4, 1.0, 0.99);
    EXPECT_EQ(PoincareDistance(x, x, 1.0), 0.0);
  }
}

TEST(PoincareDistanceTest, FromOrigin) {
  const std::vector<double> zero = {0.0, 0.0};
  for (double r : {0.1, 0.5, 0.9, 0.999}) {
    const std::vector<double> y = {r, 0.0};
    EXPECT_NEAR(PoincareDistance(zero, y, 1.0), 2.0 * std::atanh(r),
                1e-12 * std::max(1.0, 2.0 * std::atanh(r)));
  }
}

TEST(PoincareDistanceTest, SmallVectorRegimeIsEuclidean) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto x = RandomBallPoint(rng, 3, 1.0, 1e-4);
    const auto y = RandomBallPoint(rng, 3, 1.0, 1e-4);
    std::vector<double> diff(3);
    for (int k = 0; k < 3; ++k) diff[k] = x[k] - y[k];
    const double euclid = 2.0 * Norm(diff);
    EXPECT_NEAR(PoincareDistance(x, y, 1.0), euclid, 1e-6 * euclid);
  }
}

TEST(PoincareDistanceTest, MatchesMobiusDefinition) {
  std::mt19937_64 rng(3);
  for (double kappa : {0.1, 1.0, 10.0}) {
    for (int i = 0; i < 100; ++i) {
      const auto x = RandomBallPoint(rng, 5, kappa, 0.9);
      const auto y = RandomBallPoint(rng, 5, kappa, 0.9);
      std::vector<double> neg_x(x);
      for (double& v : neg_x) v = -v;
      const double sk = std::sqrt(kappa);
      const double expected =
          2.0 / sk * std::atanh(sk * Norm(MobiusAdd(neg_x, y, kappa)));
      EXPECT_NEAR(PoincareDistance(x, y, kappa), expected,
                  1e-9 * std::max(1.0, expected));
    }
  }
}

TEST(PoincareDistanceTest, MetricAxioms) {
  std::mt19937_64 rng(4);
  for (double kappa : {0.1, 1.0, 10.0}) {
    for (int i = 0; i < 300; ++i) {
      const auto x = RandomBallPoint(rng, 3, kappa, 0.95);
      const auto y = RandomBallPoint(rng, 3, kappa, 0.95);
      const auto z = RandomBallPoint(rng, 3, kappa, 0.95);
      const double xy = PoincareDistance(x, y, kappa);
      EXPECT_NEAR(xy, PoincareDistance(y, x, kappa), 1e-12 * std::max(1.0, xy));
      EXPECT_GE(xy, 0.0);
      EXPECT_LE(xy, PoincareDistance(x, z, kappa) +
                        PoincareDistance(z, y, kappa) + 1e-9);
    }
  }
}

TEST(PoincareDistanceTest, DomainErrors) {
  const std::vector<double> inside = {0.1, 0.0};
  const std::vector<double> edge = {1.0, 0.0};
  EXPECT_EQ(CodeOf([&] { PoincareDistance(inside, edge, 1.0); }),
            ErrorCode::kDomain);
  const std::vector<double> outside_k4 = {0.6, 0.0};  // sqrt(4) * 0.6 > 1
  EXPECT_EQ(CodeOf([&] { PoincareDistance(inside, outside_k4, 4.0); }),
            ErrorCode::kDomain);
  const std::vector<double> shorter = {0.1};
  EXPECT_EQ(CodeOf([&] { PoincareDistance(inside, shorter, 1.0); }),
            ErrorCode::kLengthMismatch);
}

TEST(PoincareDistanceTest, EuclideanLimitOfEmbeddedFeatures) {
  std::mt19937_64 rng(5);
  const FeatureGrid f = RandomFeatures(rng, 3, 3, 4);
  RefineParams params = RandomParams(rng, 4, 1);
  params.kappa = 1.0;
  constexpr double s = 1e-4;
  FeatureGrid scaled(3, 3, 4, 0.0);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 4; ++k) scaled.at(r, c)[k] = s * f.at(r, c)[k];
    }
  }
  const auto emb = EmbedFeatures(scaled, params);
  const int dim = params.embed_dim();
  auto point = [&](int i) {
    return std::span<const double>(emb.data() + i * dim, dim);
  };
  for (int p = 0; p < 9; ++p) {
    for (int q = 0; q < 9; ++q) {
      if (p == q) continue;
      std::vector<double> diff(static_cast<std::size_t>(dim), 0.0);
      for (int e = 0; e < dim; ++e) {
        for (int k = 0; k < 4; ++k) {
          diff[e] += params.w_f(e, k) *
                     (f.at(p / 3, p % 3)[k] - f.at(q / 3, q % 3)[k]);
        }
      }
      const double euclid = Norm(diff);
      if (euclid < 1e-6) continue;
      const double ratio = PoincareDistance(point(p), point(q), 1.0) / (2 * s);
      EXPECT_NEAR(ratio, euclid, 1e-3 * euclid);
    }
  }
}

TEST(AffinityWeightsTest, ConstantFeaturesGiveUniformWeights) {
  const FeatureGrid f(6, 7, 5, 0.3);
  const RefineParams params = RefineParams::Defaults(5);
  const AffinityStack a = AffinityWeights(f, params);
  const AffinityStack expected3 = UniformStack(6, 7, 3);
  const AffinityStack expected7 = UniformStack(6, 7, 7);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 7; ++c) {
      const auto w3 = a.window(0, r, c);
      const auto e3 = expected3.window(0, r, c);
      for (std::size_t i = 0; i < w3.size(); ++i) EXPECT_NEAR(w3[i], e3[i], 1e-15);
      const auto w7 = a.window(2, r, c);
      const auto e7 = expected7.window(0, r, c);
      for (std::size_t i = 0; i < w7.size(); ++i) EXPECT_NEAR(w7[i], e7[i], 1e-15);
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.gate(k, r, c), 1.0 / 3.0, 1e-15);
    }
  }
}

TEST(AffinityWeightsTest, HugeTemperatureFlattensWeights) {
  std::mt19937_64 rng(6);
  const FeatureGrid f = RandomFeatures(rng, 8, 8, 5);
  RefineParams params = RefineParams::Defaults(5);
  params.temperatures = {1e9, 1e9, 1e9};
  const AffinityStack a = AffinityWeights(f, params);
  for (int k = 0; k < 3; ++k) {
    const AffinityStack uniform = UniformStack(8, 8, a.kernel_size(k));
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        const auto w = a.window(k, r, c);
        const auto e = uniform.window(0, r, c);
        for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], e[i], 1e-6);
      }
    }
  }
}

TEST(AffinityWeightsTest, TwoClustersMatchScalarEvaluation) {
  // Left two columns in one cluster, the rest in another.
  FeatureGrid f(5, 5, 2, 0.0);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      f.at(r, c)[0] = c < 2 ? -0.6 : 0.6;
      f.at(r, c)[1] = 0.1 * r;
    }
  }
  RefineParams params = RefineParams::Defaults(2);
  params.kernel_sizes = {3};
  params.temperatures = {0.3};
  params.g = Matrix::Zeros(1, 2);
  params.g_bias = {0.0};
  const AffinityStack a = AffinityWeights(f, params);

  auto embed = [&](int r, int c) {
    const std::vector<double> v = {f.at(r, c)[0], f.at(r, c)[1]};
    const double n = Norm(v);
    std::vector<double> h(2, 0.0);
    if (n > 0.0) {
      for (int i = 0; i < 2; ++i) h[i] = std::tanh(n) * v[i] / n;
    }
    return h;
  };
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      const auto hp = embed(r, c);
      std::vector<double> raw(9, 0.0);
      double total = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int qr = r + dy;
          const int qc = c + dx;
          if (qr < 0 || qr >= 5 || qc < 0 || qc >= 5) continue;
          std::vector<double> neg(hp);
          for (double& v : neg) v = -v;
          const double m = Norm(MobiusAdd(neg, embed(qr, qc), 1.0));
          const double d = 2.0 * 0.5 * std::log((1 + m) / (1 - m));
          raw[(dy + 1) * 3 + (dx + 1)] = std::exp(-d / 0.3);
          total += raw[(dy + 1) * 3 + (dx + 1)];
        }
      }
      const auto w = a.window(0, r, c);
      double sum = 0.0;
      for (int i = 0; i < 9; ++i) {
        EXPECT_NEAR(w[i], raw[i] / total, 1e-12);
        sum += w[i];
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      // Same-row neighbours across the cluster edge weigh less than the
      // same-row neighbour on the own side.
      if (c == 1) EXPECT_LT(w[1 * 3 + 2], w[1 * 3 + 0]);
      if (c == 2) EXPECT_LT(w[1 * 3 + 0], w[1 * 3 + 2]);
    }
  }
}

TEST(AffinityWeightsTest, RowsAndGatesAreStochastic) {
  std::mt19937_64 rng(7);
  for (double kappa : {0.1, 1.0, 10.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      const FeatureGrid f = RandomFeatures(rng, 9, 11, 5, 2.0);
      RefineParams params = RandomParams(rng, 5, 3);
      params.kappa = kappa;
      const AffinityStack a = AffinityWeights(f, params);
      for (int r = 0; r < 9; ++r) {
        for (int c = 0; c < 11; ++c) {
          double gates = 0.0;
          for (int k = 0; k < a.kernel_count(); ++k) {
            double sum = 0.0;
            for (double v : a.window(k, r, c)) {
              EXPECT_GE(v, 0.0);
              sum += v;
            }
            EXPECT_NEAR(sum, 1.0, 1e-6);
            EXPECT_GE(a.gate(k, r, c), 0.0);
            gates += a.gate(k, r, c);
          }
          EXPECT_NEAR(gates, 1.0, 1e-6);
        }
      }
    }
  }
}

TEST(AffinityWeightsTest, RejectsBadParams) {
  const FeatureGrid f(5, 5, 5, 0.0);
  RefineParams even = RefineParams::Defaults(5);
  even.kernel_sizes = {3, 4, 7};
  EXPECT_EQ(CodeOf([&] { AffinityWeights(f, even); }),
            ErrorCode::kInvalidParameter);
  RefineParams bad_tau = RefineParams::Defaults(5);
  bad_tau.temperatures[1] = 0.0;
  EXPECT_EQ(CodeOf([&] { AffinityWeights(f, bad_tau); }),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(CodeOf([&] { AffinityWeights(f, RefineParams::Defaults(4)); }),
            ErrorCode::kInvalidParameter);
}

TEST(CenterTetheredStepTest, ConstantIsFixedPoint) {
  std::mt19937_64 rng(8);
  const FeatureGrid f = RandomFeatures(rng, 7, 7, 5);
  const AffinityStack a = AffinityWeights(f, RandomParams(rng, 5, 1));
  const DepthGrid c(7, 7, 12.5);
  const DepthGrid out = CenterTetheredStep(c, c, a);
  for (double v : out.values()) EXPECT_NEAR(v, 12.5, 1e-12);
}

TEST(CenterTetheredStepTest, TetheredCenterHandArithmetic) {
  const AffinityStack a = UniformStack(3, 3, 3);
  const DepthGrid current(3, 3, 8.0);
  DepthGrid init(3, 3, 8.0);
  init(1, 1) = 0.0;
  const DepthGrid out = CenterTetheredStep(current, init, a);
  EXPECT_NEAR(out(1, 1), 64.0 / 9.0, 1e-14);
}

TEST(CenterTetheredStepTest, MatchesReferenceOneStep) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureGrid f = RandomFeatures(rng, 8, 8, 5);
    RefineParams params = RandomParams(rng, 5, 1);
    const DepthGrid init = RandomGrid(rng, 8, 8, 1.0, 50.0);
    const BinaryMask empty(8, 8, false);
    const DepthGrid step =
        CenterTetheredStep(init, init, AffinityWeights(f, params));
    const DepthGrid expected =
        oracle::ReferencePropagate(init, init, empty, f, params);
    EXPECT_LE(MaxAbsDiff(step, expected), 1e-10);
  }
}

TEST(CenterTetheredStepTest, DimensionMismatch) {
  const AffinityStack a = UniformStack(4, 4, 3);
  EXPECT_EQ(CodeOf([&] {
              CenterTetheredStep(DepthGrid(4, 5, 1.0), DepthGrid(4, 5, 1.0), a);
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(SensorAnchorBlendTest, QuarterAlpha) {
  FeatureGrid f(3, 3, 1, 0.0);
  RefineParams params = RefineParams::Defaults(1);
  params.w_alpha_bias = -std::log(3.0);  // logistic = 0.25
  BinaryMask mask(3, 3, false);
  mask.Set(4, true);
  const DepthGrid out = SensorAnchorBlend(DepthGrid(3, 3, 4.0),
                                          DepthGrid(3, 3, 8.0), mask, f, params);
  EXPECT_NEAR(out(1, 1), 5.0, 1e-14);
  EXPECT_EQ(out(0, 0), 4.0);
}

TEST(SensorAnchorBlendTest, FullAnchoringAndEmptyMask) {
  std::mt19937_64 rng(10);
  const FeatureGrid f = RandomFeatures(rng, 6, 6, 5);
  RefineParams params = RefineParams::Defaults(5);
  params.w_alpha_bias = 40.0;  // logistic(40) == 1 in double precision
  const DepthGrid mixed = RandomGrid(rng, 6, 6, 1.0, 9.0);
  const DepthGrid sensor = RandomGrid(rng, 6, 6, 1.0, 9.0);
  EXPECT_EQ(SensorAnchorBlend(mixed, sensor, BinaryMask(6, 6, true), f, params),
            sensor);
  EXPECT_EQ(SensorAnchorBlend(mixed, sensor, BinaryMask(6, 6, false), f,
                              RandomParams(rng, 5, 1)),
            mixed);
}

TEST(AnchorMapTest, DefaultIsPointNineAtZeroFeatures) {
  const auto alpha = AnchorMap(FeatureGrid(3, 3, 5, 0.0), RefineParams::Defaults(5));
  for (double a : alpha) EXPECT_NEAR(a, 0.9, 1e-15);
}

TEST(RefineTest, ConstantIsFixedPoint) {
  std::mt19937_64 rng(11);
  const FeatureGrid f = RandomFeatures(rng, 8, 9, 5);
  const DepthGrid c(8, 9, 7.0);
  const DepthGrid out =
      Refine(c, c, RandomMask(rng, 8, 9, 0.3), f, RandomParams(rng, 5, 4));
  for (double v : out.values()) EXPECT_NEAR(v, 7.0, 1e-12);
}

TEST(RefineTest, SingleIterationIsManualComposition) {
  std::mt19937_64 rng(12);
  const FeatureGrid f = RandomFeatures(rng, 8, 8, 5);
  const RefineParams params = RandomParams(rng, 5, 1);
  const DepthGrid init = RandomGrid(rng, 8, 8, 1.0, 50.0);
  const DepthGrid sensor = RandomGrid(rng, 8, 8, 1.0, 50.0);
  const BinaryMask mask = RandomMask(rng, 8, 8, 0.3);
  const DepthGrid manual = SensorAnchorBlend(
      CenterTetheredStep(init, init, AffinityWeights(f, params)), sensor, mask,
      f, params);
  EXPECT_EQ(Refine(init, sensor, mask, f, params), manual);
}

TEST(RefineTest, ZeroIterationsRejected) {
  RefineParams params = RefineParams::Defaults(5);
  params.iterations = 0;
  const DepthGrid g(5, 5, 1.0);
  EXPECT_EQ(CodeOf([&] {
              Refine(g, g, BinaryMask(5, 5, false), FeatureGrid(5, 5, 5, 0.0),
                     params);
            }),
            ErrorCode::kInvalidParameter);
}

TEST(RefineTest, MatchesReferenceOracle) {
  std::mt19937_64 rng(13);
  for (int iterations : {1, 3, 6}) {
    for (int trial = 0; trial < 10; ++trial) {
      const FeatureGrid f = RandomFeatures(rng, 8, 8, 5);
      const RefineParams params = RandomParams(rng, 5, iterations);
      const DepthGrid init = RandomGrid(rng, 8, 8, 0.0, 80.0);
      const DepthGrid sensor = RandomGrid(rng, 8, 8, 0.0, 80.0);
      const BinaryMask mask = RandomMask(rng, 8, 8, 0.2);
      EXPECT_LE(MaxAbsDiff(Refine(init, sensor, mask, f, params),
                           oracle::ReferencePropagate(init, sensor, mask, f,
                                                      params)),
                1e-9);
    }
  }
}

TEST(RefineTest, ClampsToDepthRange) {
  std::mt19937_64 rng(14);
  const FeatureGrid f = RandomFeatures(rng, 6, 6, 5);
  RefineParams params = RandomParams(rng, 5, 2);
  params.d_max = 10.0;
  const DepthGrid init = RandomGrid(rng, 6, 6, 5.0, 30.0);
  const DepthGrid out =
      Refine(init, init, RandomMask(rng, 6, 6, 0.5), f, params);
  for (double v : out.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 10.0);
  }
}

TEST(RefineTest, SingleStepStaysWithinLocalRange) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureGrid f = RandomFeatures(rng, 10, 10, 5);
    const RefineParams params = RandomParams(rng, 5, 1);
    const DepthGrid init = RandomGrid(rng, 10, 10, 1.0, 90.0);
    const DepthGrid sensor = RandomGrid(rng, 10, 10, 1.0, 90.0);
    const BinaryMask mask = RandomMask(rng, 10, 10, 0.3);
    const DepthGrid out = Refine(init, sensor, mask, f, params);
    const int half = params.max_kernel() / 2;
    for (int r = 0; r < 10; ++r) {
      for (int c = 0; c < 10; ++c) {
        double lo = init(r, c);
        double hi = init(r, c);
        for (int dy = -half; dy <= half; ++dy) {
          for (int dx = -half; dx <= half; ++dx) {
            const int qr = r + dy;
            const int qc = c + dx;
            if (qr < 0 || qr >= 10 || qc < 0 || qc >= 10) continue;
            lo = std::min(lo, init(qr, qc));
            hi = std::max(hi, init(qr, qc));
          }
        }
        if (mask(r, c)) {
          lo = std::min(lo, sensor(r, c));
          hi = std::max(hi, sensor(r, c));
        }
        EXPECT_GE(out(r, c), std::clamp(lo, 0.0, params.d_max) - 1e-12);
        EXPECT_LE(out(r, c), std::clamp(hi, 0.0, params.d_max) + 1e-12);
      }
    }
  }
}

TEST(RefineTest, ManyStepsStayWithinGlobalRange) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const FeatureGrid f = RandomFeatures(rng, 9, 9, 5);
    const RefineParams params = RandomParams(rng, 5, 6);
    const DepthGrid init = RandomGrid(rng, 9, 9, 1.0, 40.0);
    const DepthGrid sensor = RandomGrid(rng, 9, 9, 20.0, 60.0);
    const BinaryMask mask = RandomMask(rng, 9, 9, 0.3);
    const DepthGrid out = Refine(init, sensor, mask, f, params);
    for (double v : out.values()) {
      EXPECT_GE(v, 1.0 - 1e-12);
      EXPECT_LE(v, 60.0 + 1e-12);
    }
  }
}

TEST(RefineTest, ChannelPermutationEquivariance) {
  std::mt19937_64 rng(17);
  const FeatureGrid f = RandomFeatures(rng, 8, 8, 5);
  const RefineParams params = RandomParams(rng, 5, 3);
  const DepthGrid init = RandomGrid(rng, 8, 8, 1.0, 50.0);
  const DepthGrid sensor = RandomGrid(rng, 8, 8, 1.0, 50.0);
  const BinaryMask mask = RandomMask(rng, 8, 8, 0.3);

  const std::vector<int> perm = {3, 0, 4, 1, 2};
  FeatureGrid pf(8, 8, 5, 0.0);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      for (int k = 0; k < 5; ++k) pf.at(r, c)[k] = f.at(r, c)[perm[k]];
    }
  }
  RefineParams pp = params;
  for (int k = 0; k < 5; ++k) {
    for (int e = 0; e < params.embed_dim(); ++e) pp.w_f(e, k) = params.w_f(e, perm[k]);
    for (int g = 0; g < params.g.rows; ++g) pp.g(g, k) = params.g(g, perm[k]);
    pp.w_alpha[k] = params.w_alpha[perm[k]];
  }
  EXPECT_LE(MaxAbsDiff(Refine(init, sensor, mask, f, params),
                       Refine(init, sensor, mask, pf, pp)),
            1e-12);
}

TEST(RefineTest, DimensionMismatch) {
  const DepthGrid g(5, 5, 1.0);
  EXPECT_EQ(CodeOf([&] {
              Refine(g, DepthGrid(5, 6, 1.0), BinaryMask(5, 5, false),
                     FeatureGrid(5, 5, 5, 0.0), RefineParams::Defaults(5));
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(HandcraftedFeaturesTest, ConstantInputs) {
  const FeatureGrid f = HandcraftedFeatures(DepthGrid(4, 6, 2.0), DepthGrid(4, 6, 9.0));
  ASSERT_EQ(f.channels(), 5);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 6; ++c) {
      EXPECT_EQ(f.at(r, c)[3], 0.0);
      EXPECT_EQ(f.at(r, c)[4], 0.0);
    }
  }
  EXPECT_EQ(f.at(0, 0)[1], -1.0);
  EXPECT_EQ(f.at(3, 0)[1], 1.0);
  EXPECT_EQ(f.at(0, 0)[2], -1.0);
  EXPECT_EQ(f.at(0, 5)[2], 1.0);
}

TEST(HandcraftedFeaturesTest, StepEdgeSupport) {
  DepthGrid prior(5, 8, 10.0);
  for (int r = 0; r < 5; ++r) {
    for (int c = 4; c < 8; ++c) prior(r, c) = 20.0;
  }
  const FeatureGrid f = HandcraftedFeatures(prior, prior);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 8; ++c) {
      if (c == 3) {
        EXPECT_EQ(f.at(r, c)[3], 1.0);
      } else {
        EXPECT_EQ(f.at(r, c)[3], 0.0);
      }
      EXPECT_EQ(f.at(r, c)[4], 0.0);
    }
  }
}

TEST(HandcraftedFeaturesTest, ChannelsWithinUnitRange) {
  std::mt19937_64 rng(18);
  const FeatureGrid f = HandcraftedFeatures(RandomGrid(rng, 13, 17, 0.0, 255.0),
                                            RandomGrid(rng, 13, 17, 1.0, 80.0));
  for (int r = 0; r < 13; ++r) {
    for (int c = 0; c < 17; ++c) {
      for (double v : f.at(r, c)) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(ResidualInitTest, ClampsBothEnds) {
  const DepthGrid pseudo(3, 3, 3.0);
  EXPECT_EQ(ResidualInit(pseudo, 90.0), pseudo);
  EXPECT_EQ(ResidualInit(pseudo, DepthGrid(3, 3, -5.0), 90.0)(1, 1), 0.0);
  EXPECT_EQ(ResidualInit(DepthGrid(3, 3, 89.0), DepthGrid(3, 3, 5.0), 90.0)(0, 2),
            90.0);
  EXPECT_EQ(ResidualInit(DepthGrid(3, 3, 120.0), 90.0)(2, 2), 90.0);
  EXPECT_EQ(CodeOf([] {
              ResidualInit(DepthGrid(3, 3, 1.0), DepthGrid(3, 4, 1.0), 90.0);
            }),
            ErrorCode::kDimensionMismatch);
}

}  // namespace
}  // namespace depthfuse
