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

#ifndef DEPTHFUSE_ORACLE_H_
#define DEPTHFUSE_ORACLE_H_

#include <cstdint>
#include <vector>

#include "depthfuse/grid.h"
#include "depthfuse/refine.h"

// Naive, independently written references for the fast paths. Everything
// here is explicit loops over explicit matrices and is size-capped.
namespace depthfuse::oracle {

inline constexpr int kMaxOraclePixels = 4096;

// The restricted Poisson system written out densely.
struct DenseSystem {
  std::vector<Pixel> unknown;    // row-major
  std::vector<double> matrix;    // |U| x |U|, row-major
  std::vector<double> rhs;       // |U|

  std::size_t dimension() const { return unknown.size(); }
  double at(std::size_t i, std::size_t j) const {
    return matrix[i * unknown.size() + j];
  }
};

DenseSystem AssembleDenseSystem(const DepthGrid& sparse,
                                const DepthGrid& prior);

// max_i |(A x - b)_i|.
double DenseResidualInf(const DenseSystem& system,
                        const std::vector<double>& x);

// Cholesky solve of the dense system; returns the full reconstructed raster.
DepthGrid DensePoissonSolve(const DepthGrid& sparse, const DepthGrid& prior);

// Solution vector over the unknowns only (row-major order).
std::vector<double> DenseSolveUnknowns(const DenseSystem& system);

// Straight transliteration of the propagation equations: recomputes every
// embedding, distance, weight and gate from scratch each iteration.
DepthGrid ReferencePropagate(const DepthGrid& init, const DepthGrid& sensor,
                             const BinaryMask& mask,
                             const FeatureGrid& features,
                             const RefineParams& params);

struct SyntheticScene {
  DepthGrid dense_gt;
  DepthGrid prior;
  DepthGrid sparse;
  BinaryMask mask;
  std::uint64_t seed = 0;
};

// Piecewise-planar ground truth with a few step discontinuities, a prior
// distorted by smooth low-frequency gain and bias fields, and ~6% anchors.
SyntheticScene SynthScene(int height, int width, std::uint64_t seed);

}  // namespace depthfuse::oracle

#endif  // DEPTHFUSE_ORACLE_H_
