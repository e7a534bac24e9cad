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

#ifndef DEPTHFUSE_POISSON_H_
#define DEPTHFUSE_POISSON_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "depthfuse/grid.h"

namespace depthfuse {

enum class Preconditioner {
  kNone,
  // Reserved. Rejected by ConjugateGradient until implemented.
  kJacobi,
};

struct CgSettings {
  // Stop when ||A x - b||_2 <= rel_tolerance * ||b||_2.
  double rel_tolerance = 1e-8;
  // Unset means 10 * sqrt(|U|) + 100.
  std::optional<int> max_iterations;
  Preconditioner preconditioner = Preconditioner::kNone;

  int ResolveMaxIterations(std::size_t unknown_count) const;
  void Validate() const;
};

struct SolveReport {
  int iterations = 0;
  double final_rel_residual = 0.0;
  bool converged = false;
};

// Negative 5-point Laplacian, 4 g(p) - sum of the N4 neighbours, evaluated on
// interior pixels. Border pixels of the result are 0.
DepthGrid ApplyLaplacian(const DepthGrid& grid);

// Matrix-free A_UU: L restricted to the unknown set. Holds an image-sized
// scratch raster that is zero on every known pixel, so applying the stencil
// to the scattered vector realises the masked convolution directly.
class RestrictedLaplacian {
 public:
  explicit RestrictedLaplacian(const IndexPartition& partition);

  std::size_t dimension() const { return unknown_flat_.size(); }

  // out = A_UU x. Throws kLengthMismatch on size errors.
  void Apply(std::span<const double> x, std::span<double> out);

  // Raster reads and writes performed by Apply since construction.
  std::uint64_t pixel_touches() const { return touches_; }
  std::uint64_t applications() const { return applications_; }

 private:
  int width_;
  std::vector<std::size_t> unknown_flat_;
  std::vector<double> scratch_;
  std::uint64_t touches_ = 0;
  std::uint64_t applications_ = 0;
};

std::vector<double> ApplyRestrictedOperator(std::span<const double> x_u,
                                            const IndexPartition& partition);

// (L prior - L dirichlet) restricted to U.
std::vector<double> BuildRhs(const DepthGrid& prior, const DepthGrid& dirichlet,
                             const IndexPartition& partition);

struct CgResult {
  std::vector<double> solution;
  SolveReport report;
};

// Solves A_UU x = rhs starting from x = 0. Non-convergence is reported, not
// thrown; a NaN residual throws kNumericFailure.
CgResult ConjugateGradient(std::span<const double> rhs,
                           const IndexPartition& partition,
                           const CgSettings& settings = {});

struct DensifyResult {
  DepthGrid depth;
  SolveReport report;
};

// Gradient-domain fusion of sparse metric anchors with a dense prior. Anchor
// pixels are copied from `sparse`, border pixels without anchors from
// `prior`, and the remaining pixels come from the Poisson solve.
DensifyResult Densify(const DepthGrid& sparse, const DepthGrid& prior,
                      const CgSettings& settings = {});

struct AlignResult {
  DepthGrid aligned;
  double scale = 1.0;
  double shift = 0.0;
};

// Least-squares scale/shift fit of the prior to the anchors (sparse > 0).
// The scale is kept positive: a non-positive optimum is replaced by 1e-6 and
// the shift refit for that scale.
AlignResult ScaleShiftAlign(const DepthGrid& prior, const DepthGrid& sparse);

}  // namespace depthfuse

#endif  // DEPTHFUSE_POISSON_H_
