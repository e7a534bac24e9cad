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

#ifndef DEPTHFUSE_REFINE_H_
#define DEPTHFUSE_REFINE_H_

#include <span>
#include <vector>

#include "depthfuse/grid.h"

namespace depthfuse {

// Row-major dense matrix, used for the learned linear maps.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double operator()(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
  double& operator()(int r, int c) {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }

  static Matrix Zeros(int rows, int cols);
  static Matrix Identity(int rows, int cols);
};

struct RefineParams {
  double kappa = 1.0;
  std::vector<int> kernel_sizes = {3, 5, 7};
  std::vector<double> temperatures = {0.1, 0.2, 0.4};
  int iterations = 6;
  double d_max = 90.0;

  // 1x1 projection into the embedding space: embed_dim x channels.
  Matrix w_f;
  // Gate head: one row of channel weights per kernel, plus a bias per kernel.
  Matrix g;
  std::vector<double> g_bias;
  // Anchor head: alpha = logistic(w_alpha . F + w_alpha_bias).
  std::vector<double> w_alpha;
  double w_alpha_bias = 0.0;

  // Identity projection, uniform gates, alpha = 0.9 at F = 0.
  static RefineParams Defaults(int channels);

  int channels() const { return w_f.cols; }
  int embed_dim() const { return w_f.rows; }
  int max_kernel() const;

  // Throws kInvalidParameter on the first violated constraint.
  void Validate() const;
  void Validate(int feature_channels) const;
};

// Exponential map at the origin of the Poincare ball with curvature -kappa.
// The output norm is kept strictly inside the ball, at most
// (1 - 1e-7) / sqrt(kappa).
std::vector<double> ExpMapOrigin(std::span<const double> v, double kappa);

// Mobius addition x (+)_kappa y.
std::vector<double> MobiusAdd(std::span<const double> x,
                              std::span<const double> y, double kappa);

// Geodesic distance (2 / sqrt(kappa)) artanh(sqrt(kappa) |(-x) (+) y|).
// Throws kDomain when an argument is not strictly inside the ball.
double PoincareDistance(std::span<const double> x, std::span<const double> y,
                        double kappa);

// Per-kernel row-stochastic neighbourhood weights and per-pixel kernel gates.
// Weights are stored on the full k x k window; out-of-grid neighbours carry
// weight 0 and are excluded from the normalisation.
class AffinityStack {
 public:
  AffinityStack(int height, int width, std::vector<int> kernel_sizes);

  int height() const { return height_; }
  int width() const { return width_; }
  int kernel_count() const { return static_cast<int>(kernel_sizes_.size()); }
  int kernel_size(int k) const { return kernel_sizes_[k]; }
  const std::vector<int>& kernel_sizes() const { return kernel_sizes_; }

  // Window of kernel k at pixel (row, col), indexed [dy * size + dx] with
  // (dy, dx) the offset from the top-left of the window.
  std::span<const double> window(int k, int row, int col) const;
  std::span<double> window(int k, int row, int col);

  double gate(int k, int row, int col) const {
    return gates_[PixelIndex(row, col) * kernel_sizes_.size() + k];
  }
  double& gate(int k, int row, int col) {
    return gates_[PixelIndex(row, col) * kernel_sizes_.size() + k];
  }

 private:
  std::size_t PixelIndex(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int height_;
  int width_;
  std::vector<int> kernel_sizes_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> gates_;
};

// Embeds every pixel: h_p = ExpMapOrigin(W_f F(p)), flattened pixel-major.
std::vector<double> EmbedFeatures(const FeatureGrid& features,
                                  const RefineParams& params);

AffinityStack AffinityWeights(const FeatureGrid& features,
                              const RefineParams& params);

// One center-tethered, gated multi-kernel propagation step.
DepthGrid CenterTetheredStep(const DepthGrid& current, const DepthGrid& init,
                             const AffinityStack& affinity);

// alpha(p) = logistic(w_alpha . F(p) + bias), row-major.
std::vector<double> AnchorMap(const FeatureGrid& features,
                              const RefineParams& params);

DepthGrid SensorAnchorBlend(const DepthGrid& mixed, const DepthGrid& sensor,
                            const BinaryMask& mask,
                            const FeatureGrid& features,
                            const RefineParams& params);

// T rounds of CenterTetheredStep followed by sensor anchoring, then a clamp
// to [0, d_max]. The tether always points at `init`, and alpha is evaluated
// once from the static features.
DepthGrid Refine(const DepthGrid& init, const DepthGrid& sensor,
                 const BinaryMask& mask, const FeatureGrid& features,
                 const RefineParams& params);

// Five-channel stand-in for learned features: intensity, row, column, and the
// horizontal and vertical forward differences of the prior, each in [-1, 1].
FeatureGrid HandcraftedFeatures(const DepthGrid& image, const DepthGrid& prior);

// clamp(pseudo + residual, 0, d_max).
DepthGrid ResidualInit(const DepthGrid& pseudo, const DepthGrid& residual,
                       double d_max);
DepthGrid ResidualInit(const DepthGrid& pseudo, double d_max);

}  // namespace depthfuse

#endif  // DEPTHFUSE_REFINE_H_
