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

#include "depthfuse/poisson.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "depthfuse/error.h"

namespace depthfuse {
namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double StencilAt(const DepthGrid& g, int r, int c) {
  return 4.0 * g(r, c) - g(r - 1, c) - g(r + 1, c) - g(r, c - 1) -
         g(r, c + 1);
}

void RequirePartitionShape(const DepthGrid& grid,
                           const IndexPartition& partition, const char* name) {
  if (!grid.SameShape(partition.height, partition.width)) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << name << " is "
        << ShapeString(grid.height(), grid.width()) << " but partition is "
        << ShapeString(partition.height, partition.width);
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
}

}  // namespace

int CgSettings::ResolveMaxIterations(std::size_t unknown_count) const {
  if (max_iterations) return *max_iterations;
  return static_cast<int>(
             10.0 * std::sqrt(static_cast<double>(unknown_count))) +
         100;
}

void CgSettings::Validate() const {
  if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0)) {
    throw Error(ErrorCode::kInvalidParameter,
                "cg rel_tolerance must lie in (0, 1)");
  }
  if (max_iterations && *max_iterations < 1) {
    throw Error(ErrorCode::kInvalidParameter, "cg max_iterations must be >= 1");
  }
  if (preconditioner != Preconditioner::kNone) {
    throw Error(ErrorCode::kInvalidParameter,
                "only the unpreconditioned solver is available");
  }
}

DepthGrid ApplyLaplacian(const DepthGrid& grid) {
  RequireMinimumShape(grid.height(), grid.width());
  DepthGrid out(grid.height(), grid.width(), 0.0);
  for (int r = 1; r + 1 < grid.height(); ++r) {
    for (int c = 1; c + 1 < grid.width(); ++c) {
      out(r, c) = StencilAt(grid, r, c);
    }
  }
  return out;
}

RestrictedLaplacian::RestrictedLaplacian(const IndexPartition& partition)
    : width_(partition.width),
      scratch_(static_cast<std::size_t>(partition.height) * partition.width,
               0.0) {
  unknown_flat_.reserve(partition.unknown.size());
  for (const Pixel& p : partition.unknown) {
    unknown_flat_.push_back(static_cast<std::size_t>(p.row) * width_ + p.col);
  }
}

void RestrictedLaplacian::Apply(std::span<const double> x,
                                std::span<double> out) {
  const std::size_t n = unknown_flat_.size();
  if (x.size() != n || out.size() != n) {
    std::ostringstream msg;
    msg << "restricted operator expects vectors of length " << n << ", got "
        << x.size() << " and " << out.size();
    throw Error(ErrorCode::kLengthMismatch, msg.str());
  }
  const std::size_t w = static_cast<std::size_t>(width_);
  double* s = scratch_.data();
  // Known pixels of the scratch raster are never written and stay 0.
  for (std::size_t i = 0; i < n; ++i) s[unknown_flat_[i]] = x[i];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t f = unknown_flat_[i];
    out[i] = 4.0 * s[f] - s[f - 1] - s[f + 1] - s[f - w] - s[f + w];
  }
  touches_ += 6 * n;
  ++applications_;
}

std::vector<double> ApplyRestrictedOperator(std::span<const double> x_u,
                                            const IndexPartition& partition) {
  RestrictedLaplacian op(partition);
  std::vector<double> out(op.dimension());
  op.Apply(x_u, out);
  return out;
}

std::vector<double> BuildRhs(const DepthGrid& prior, const DepthGrid& dirichlet,
                             const IndexPartition& partition) {
  RequireSameShape(prior, dirichlet, "prior", "dirichlet");
  RequirePartitionShape(prior, partition, "prior");
  std::vector<double> rhs;
  rhs.reserve(partition.unknown.size());
  for (const Pixel& p : partition.unknown) {
    rhs.push_back(StencilAt(prior, p.row, p.col) -
                  StencilAt(dirichlet, p.row, p.col));
  }
  return rhs;
}

CgResult ConjugateGradient(std::span<const double> rhs,
                           const IndexPartition& partition,
                           const CgSettings& settings) {
  settings.Validate();
  RestrictedLaplacian op(partition);
  const std::size_t n = op.dimension();
  if (rhs.size() != n) {
    std::ostringstream msg;
    msg << "rhs has length " << rhs.size() << " but |U| = " << n;
    throw Error(ErrorCode::kLengthMismatch, msg.str());
  }

  CgResult result;
  result.solution.assign(n, 0.0);
  std::vector<double>& x = result.solution;
  SolveReport& report = result.report;

  const double rhs_norm = std::sqrt(Dot(rhs, rhs));
  if (!std::isfinite(rhs_norm)) {
    throw Error(ErrorCode::kNumericFailure, "non-finite right-hand side");
  }
  if (rhs_norm == 0.0) {
    report.converged = true;
    return result;
  }

  const double threshold = settings.rel_tolerance * rhs_norm;
  const int max_iterations = settings.ResolveMaxIterations(n);

  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> p = r;
  std::vector<double> ap(n);
  double rr = Dot(r, r);

  auto true_residual = [&]() {
    op.Apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
    return Dot(r, r);
  };

  bool residual_fresh = false;
  while (report.iterations < max_iterations) {
    op.Apply(p, ap);
    const double pap = Dot(p, ap);
    if (!std::isfinite(pap) || pap <= 0.0) {
      throw Error(ErrorCode::kNumericFailure,
                  "conjugate gradient broke down (p'Ap = " +
                      std::to_string(pap) + ")");
    }
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rr_next = Dot(r, r);
    ++report.iterations;
    residual_fresh = false;
    if (std::isnan(rr_next)) {
      throw Error(ErrorCode::kNumericFailure, "NaN in CG residual");
    }
    if (std::sqrt(rr_next) <= threshold) {
      // The recursive residual drifts from b - Ax; confirm before stopping
      // and restart from the true residual if it disagrees.
      rr_next = true_residual();
      residual_fresh = true;
      if (std::sqrt(rr_next) <= threshold) break;
      p = r;
      rr = rr_next;
      continue;
    }
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_next;
  }

  const double final_rr = residual_fresh ? Dot(r, r) : true_residual();
  if (std::isnan(final_rr)) {
    throw Error(ErrorCode::kNumericFailure, "NaN in CG residual");
  }
  report.final_rel_residual = std::sqrt(final_rr) / rhs_norm;
  report.converged = report.final_rel_residual <= settings.rel_tolerance;
  return result;
}

DensifyResult Densify(const DepthGrid& sparse, const DepthGrid& prior,
                      const CgSettings& settings) {
  RequireSameShape(sparse, prior, "sparse", "prior");
  const IndexPartition partition = BuildPartition(sparse);
  DepthGrid dirichlet = AssembleDirichletField(sparse, prior, partition);
  const std::vector<double> rhs = BuildRhs(prior, dirichlet, partition);
  CgResult solved = ConjugateGradient(rhs, partition, settings);

  DensifyResult result{std::move(dirichlet), solved.report};
  for (std::size_t i = 0; i < partition.unknown.size(); ++i) {
    const Pixel& p = partition.unknown[i];
    result.depth(p.row, p.col) = solved.solution[i];
  }
  return result;
}

AlignResult ScaleShiftAlign(const DepthGrid& prior, const DepthGrid& sparse) {
  RequireSameShape(prior, sparse, "prior", "sparse");
  std::vector<double> e;
  std::vector<double> s;
  for (std::size_t i = 0; i < sparse.size(); ++i) {
    if (sparse[i] > 0.0) {
      e.push_back(prior[i]);
      s.push_back(sparse[i]);
    }
  }
  if (e.size() < 2) {
    throw Error(ErrorCode::kInsufficientAnchors,
                "scale/shift alignment needs at least 2 anchors, got " +
                    std::to_string(e.size()));
  }
  const double count = static_cast<double>(e.size());
  const double e_mean = std::accumulate(e.begin(), e.end(), 0.0) / count;
  const double s_mean = std::accumulate(s.begin(), s.end(), 0.0) / count;
  double see = 0.0;
  double ses = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    see += (e[i] - e_mean) * (e[i] - e_mean);
    ses += (e[i] - e_mean) * (s[i] - s_mean);
  }
  if (see == 0.0) {
    throw Error(ErrorCode::kDegeneratePrior,
                "prior is constant over all anchor pixels");
  }

  AlignResult result;
  result.scale = ses / see;
  if (result.scale <= 0.0) result.scale = 1e-6;
  result.shift = s_mean - result.scale * e_mean;

  std::vector<double> values(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    values[i] = result.scale * prior[i] + result.shift;
  }
  result.aligned = DepthGrid(prior.height(), prior.width(), std::move(values));
  return result;
}

}  // namespace depthfuse
