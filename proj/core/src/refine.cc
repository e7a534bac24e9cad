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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "depthfuse/error.h"

namespace depthfuse {
namespace {

// Largest admissible sqrt(kappa) * |x| for points handled near the boundary.
constexpr double kBallEdge = 1.0 - 1e-7;

double Dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double Logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidParameter, what);
}

DepthGrid Blend(const DepthGrid& mixed, const DepthGrid& sensor,
                const BinaryMask& mask, std::span<const double> alpha) {
  DepthGrid out = mixed;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) {
      out[i] = (1.0 - alpha[i]) * mixed[i] + alpha[i] * sensor[i];
    }
  }
  return out;
}

}  // namespace

Matrix Matrix::Zeros(int rows, int cols) {
  return Matrix{rows, cols,
                std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0)};
}

Matrix Matrix::Identity(int rows, int cols) {
  Matrix m = Zeros(rows, cols);
  for (int i = 0; i < std::min(rows, cols); ++i) m(i, i) = 1.0;
  return m;
}

RefineParams RefineParams::Defaults(int channels) {
  RefineParams params;
  params.w_f = Matrix::Identity(channels, channels);
  params.g = Matrix::Zeros(static_cast<int>(params.kernel_sizes.size()),
                           channels);
  params.g_bias.assign(params.kernel_sizes.size(), 0.0);
  params.w_alpha.assign(static_cast<std::size_t>(channels), 0.0);
  params.w_alpha_bias = std::log(9.0);  // logistic(ln 9) = 0.9
  return params;
}

int RefineParams::max_kernel() const {
  return kernel_sizes.empty()
             ? 0
             : *std::max_element(kernel_sizes.begin(), kernel_sizes.end());
}

void RefineParams::Validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) Invalid("kappa must be > 0");
  if (kernel_sizes.empty()) Invalid("at least one kernel size is required");
  for (int k : kernel_sizes) {
    if (k < 3 || k % 2 == 0) {
      Invalid("kernel sizes must be odd and >= 3, got " + std::to_string(k));
    }
  }
  if (temperatures.size() != kernel_sizes.size()) {
    Invalid("need one temperature per kernel");
  }
  for (double t : temperatures) {
    if (!(t > 0.0) || !std::isfinite(t)) Invalid("temperatures must be > 0");
  }
  if (iterations < 1) Invalid("iterations must be >= 1");
  if (!(d_max > 0.0) || !std::isfinite(d_max)) Invalid("d_max must be > 0");
  if (w_f.rows < 1 || w_f.cols < 1 ||
      w_f.values.size() != static_cast<std::size_t>(w_f.rows) * w_f.cols) {
    Invalid("w_f must be a non-empty embed_dim x channels matrix");
  }
  if (g.rows != static_cast<int>(kernel_sizes.size()) || g.cols != w_f.cols ||
      g.values.size() != static_cast<std::size_t>(g.rows) * g.cols) {
    Invalid("g must be kernels x channels");
  }
  if (g_bias.size() != kernel_sizes.size()) Invalid("need one g bias per kernel");
  if (w_alpha.size() != static_cast<std::size_t>(w_f.cols)) {
    Invalid("w_alpha length must equal the channel count");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(w_f.values.begin(), w_f.values.end(), finite) ||
      !std::all_of(g.values.begin(), g.values.end(), finite) ||
      !std::all_of(g_bias.begin(), g_bias.end(), finite) ||
      !std::all_of(w_alpha.begin(), w_alpha.end(), finite) ||
      !std::isfinite(w_alpha_bias)) {
    Invalid("refine coefficients must be finite");
  }
}

void RefineParams::Validate(int feature_channels) const {
  Validate();
  if (feature_channels != channels()) {
    std::ostringstream msg;
    msg << "refine params expect " << channels() << " feature channels, got "
        << feature_channels;
    Invalid(msg.str());
  }
}

std::vector<double> ExpMapOrigin(std::span<const double> v, double kappa) {
  if (!(kappa > 0.0)) Invalid("kappa must be > 0");
  std::vector<double> out(v.size(), 0.0);
  const double norm = std::sqrt(Dot(v, v));
  if (norm == 0.0) return out;
  const double scaled = std::sqrt(kappa) * norm;
  const double radius = std::min(std::tanh(scaled), kBallEdge);
  const double factor = radius / scaled;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = factor * v[i];
  return out;
}

std::vector<double> MobiusAdd(std::span<const double> x,
                              std::span<const double> y, double kappa) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "Mobius addition of unequal sizes");
  }
  const double xy = Dot(x, y);
  const double x2 = Dot(x, x);
  const double y2 = Dot(y, y);
  const double cx = 1.0 + 2.0 * kappa * xy + kappa * y2;
  const double cy = 1.0 - kappa * x2;
  const double den = 1.0 + 2.0 * kappa * xy + kappa * kappa * x2 * y2;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (cx * x[i] + cy * y[i]) / den;
  }
  return out;
}

double PoincareDistance(std::span<const double> x, std::span<const double> y,
                        double kappa) {
  if (!(kappa > 0.0)) Invalid("kappa must be > 0");
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "distance between unequal sizes");
  }
  const double sqrt_k = std::sqrt(kappa);
  const double x2 = Dot(x, x);
  const double y2 = Dot(y, y);
  if (!(sqrt_k * std::sqrt(x2) < 1.0) || !(sqrt_k * std::sqrt(y2) < 1.0)) {
    throw Error(ErrorCode::kDomain, "point lies on or outside the Poincare ball");
  }
  // |(-x) (+) y|^2 = |x - y|^2 / (1 - 2k<x,y> + k^2 |x|^2 |y|^2); this form
  // is symmetric in (x, y) and avoids cancellation for nearby points.
  double diff2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    diff2 += d * d;
  }
  const double den = 1.0 - 2.0 * kappa * Dot(x, y) + kappa * kappa * x2 * y2;
  const double arg = std::min(sqrt_k * std::sqrt(diff2 / den), kBallEdge);
  return 2.0 / sqrt_k * std::atanh(arg);
}

AffinityStack::AffinityStack(int height, int width,
                             std::vector<int> kernel_sizes)
    : height_(height), width_(width), kernel_sizes_(std::move(kernel_sizes)) {
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  for (int k : kernel_sizes_) {
    weights_.emplace_back(pixels * static_cast<std::size_t>(k) * k, 0.0);
  }
  gates_.assign(pixels * kernel_sizes_.size(), 0.0);
}

std::span<const double> AffinityStack::window(int k, int row, int col) const {
  const std::size_t area =
      static_cast<std::size_t>(kernel_sizes_[k]) * kernel_sizes_[k];
  return {weights_[k].data() + PixelIndex(row, col) * area, area};
}

std::span<double> AffinityStack::window(int k, int row, int col) {
  const std::size_t area =
      static_cast<std::size_t>(kernel_sizes_[k]) * kernel_sizes_[k];
  return {weights_[k].data() + PixelIndex(row, col) * area, area};
}

std::vector<double> EmbedFeatures(const FeatureGrid& features,
                                  const RefineParams& params) {
  params.Validate(features.channels());
  const int dim = params.embed_dim();
  std::vector<double> embedded;
  embedded.reserve(static_cast<std::size_t>(features.height()) *
                   features.width() * dim);
  std::vector<double> projected(static_cast<std::size_t>(dim));
  for (int r = 0; r < features.height(); ++r) {
    for (int c = 0; c < features.width(); ++c) {
      const auto f = features.at(r, c);
      for (int e = 0; e < dim; ++e) projected[e] = Dot(params.w_f.row(e), f);
      const auto h = ExpMapOrigin(projected, params.kappa);
      embedded.insert(embedded.end(), h.begin(), h.end());
    }
  }
  return embedded;
}

AffinityStack AffinityWeights(const FeatureGrid& features,
                              const RefineParams& params) {
  params.Validate(features.channels());
  const int h = features.height();
  const int w = features.width();
  RequireMinimumShape(h, w);

  const int dim = params.embed_dim();
  const std::vector<double> embedded = EmbedFeatures(features, params);
  auto point = [&](int r, int c) {
    return std::span<const double>(
        embedded.data() + (static_cast<std::size_t>(r) * w + c) * dim,
        static_cast<std::size_t>(dim));
  };

  AffinityStack stack(h, w, params.kernel_sizes);
  const int kernels = stack.kernel_count();
  const int big = params.max_kernel();
  const int big_half = big / 2;
  std::vector<double> dist(static_cast<std::size_t>(big) * big);
  std::vector<char> inside(dist.size());
  std::vector<double> logits(static_cast<std::size_t>(kernels));

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      // Distances over the largest window are shared by every kernel.
      const auto hp = point(r, c);
      for (int dy = -big_half; dy <= big_half; ++dy) {
        for (int dx = -big_half; dx <= big_half; ++dx) {
          const std::size_t slot =
              static_cast<std::size_t>(dy + big_half) * big + (dx + big_half);
          const int qr = r + dy;
          const int qc = c + dx;
          inside[slot] = qr >= 0 && qr < h && qc >= 0 && qc < w;
          dist[slot] = inside[slot]
                           ? PoincareDistance(hp, point(qr, qc), params.kappa)
                           : 0.0;
        }
      }

      for (int k = 0; k < kernels; ++k) {
        const int size = params.kernel_sizes[k];
        const int half = size / 2;
        const double tau = params.temperatures[k];
        auto win = stack.window(k, r, c);
        double total = 0.0;
        for (int dy = -half; dy <= half; ++dy) {
          for (int dx = -half; dx <= half; ++dx) {
            const std::size_t slot =
                static_cast<std::size_t>(dy + big_half) * big + (dx + big_half);
            const std::size_t local =
                static_cast<std::size_t>(dy + half) * size + (dx + half);
            const double a = inside[slot] ? std::exp(-dist[slot] / tau) : 0.0;
            win[local] = a;
            total += a;
          }
        }
        if (!(total > 0.0)) {
          throw Error(ErrorCode::kDegenerateNeighborhood,
                      "empty affinity neighbourhood at pixel (" +
                          std::to_string(r) + ", " + std::to_string(c) + ")");
        }
        for (double& a : win) a /= total;
      }

      const auto f = features.at(r, c);
      for (int k = 0; k < kernels; ++k) {
        logits[k] = Dot(params.g.row(k), f) + params.g_bias[k];
      }
      const double top = *std::max_element(logits.begin(), logits.end());
      double norm = 0.0;
      for (double& l : logits) {
        l = std::exp(l - top);
        norm += l;
      }
      for (int k = 0; k < kernels; ++k) stack.gate(k, r, c) = logits[k] / norm;
    }
  }
  return stack;
}

DepthGrid CenterTetheredStep(const DepthGrid& current, const DepthGrid& init,
                             const AffinityStack& affinity) {
  RequireSameShape(current, init, "current", "init");
  if (!current.SameShape(affinity.height(), affinity.width())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dimension mismatch: current is " +
                    ShapeString(current.height(), current.width()) +
                    " but affinity is " +
                    ShapeString(affinity.height(), affinity.width()));
  }
  const int h = current.height();
  const int w = current.width();
  DepthGrid out(h, w, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double mixed = 0.0;
      for (int k = 0; k < affinity.kernel_count(); ++k) {
        const int size = affinity.kernel_size(k);
        const int half = size / 2;
        const auto win = affinity.window(k, r, c);
        double propagated = 0.0;
        for (int dy = -half; dy <= half; ++dy) {
          const int qr = r + dy;
          if (qr < 0 || qr >= h) continue;
          for (int dx = -half; dx <= half; ++dx) {
            const int qc = c + dx;
            if (qc < 0 || qc >= w) continue;
            const double value =
                (dy == 0 && dx == 0) ? init(r, c) : current(qr, qc);
            propagated +=
                win[static_cast<std::size_t>(dy + half) * size + (dx + half)] *
                value;
          }
        }
        mixed += affinity.gate(k, r, c) * propagated;
      }
      out(r, c) = mixed;
    }
  }
  return out;
}

std::vector<double> AnchorMap(const FeatureGrid& features,
                              const RefineParams& params) {
  params.Validate(features.channels());
  std::vector<double> alpha;
  alpha.reserve(static_cast<std::size_t>(features.height()) * features.width());
  for (int r = 0; r < features.height(); ++r) {
    for (int c = 0; c < features.width(); ++c) {
      alpha.push_back(
          Logistic(Dot(params.w_alpha, features.at(r, c)) + params.w_alpha_bias));
    }
  }
  return alpha;
}

DepthGrid SensorAnchorBlend(const DepthGrid& mixed, const DepthGrid& sensor,
                            const BinaryMask& mask,
                            const FeatureGrid& features,
                            const RefineParams& params) {
  RequireSameShape(mixed, sensor, "mixed", "sensor");
  RequireSameShape(mixed, mask, "mixed", "mask");
  RequireSameShape(mixed, features, "mixed", "features");
  return Blend(mixed, sensor, mask, AnchorMap(features, params));
}

DepthGrid Refine(const DepthGrid& init, const DepthGrid& sensor,
                 const BinaryMask& mask, const FeatureGrid& features,
                 const RefineParams& params) {
  RequireSameShape(init, sensor, "init", "sensor");
  RequireSameShape(init, mask, "init", "mask");
  RequireSameShape(init, features, "init", "features");
  params.Validate(features.channels());

  const AffinityStack affinity = AffinityWeights(features, params);
  const std::vector<double> alpha = AnchorMap(features, params);
  DepthGrid depth = init;
  for (int t = 0; t < params.iterations; ++t) {
    depth = Blend(CenterTetheredStep(depth, init, affinity), sensor, mask,
                  alpha);
  }
  for (double& v : depth.values()) v = std::clamp(v, 0.0, params.d_max);
  return depth;
}

FeatureGrid HandcraftedFeatures(const DepthGrid& image,
                                const DepthGrid& prior) {
  RequireSameShape(image, prior, "image", "prior");
  const int h = image.height();
  const int w = image.width();
  constexpr int kChannels = 5;
  FeatureGrid features(h, w, kChannels, 0.0);
  if (image.empty()) return features;

  const auto [lo_it, hi_it] =
      std::minmax_element(image.values().begin(), image.values().end());
  const double lo = *lo_it;
  const double span = *hi_it - *lo_it;

  DepthGrid gx(h, w, 0.0);
  DepthGrid gy(h, w, 0.0);
  double gx_max = 0.0;
  double gy_max = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (c + 1 < w) gx(r, c) = prior(r, c + 1) - prior(r, c);
      if (r + 1 < h) gy(r, c) = prior(r + 1, c) - prior(r, c);
      gx_max = std::max(gx_max, std::abs(gx(r, c)));
      gy_max = std::max(gy_max, std::abs(gy(r, c)));
    }
  }

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      auto f = features.at(r, c);
      f[0] = span > 0.0 ? 2.0 * (image(r, c) - lo) / span - 1.0 : 0.0;
      f[1] = h > 1 ? -1.0 + 2.0 * r / (h - 1) : 0.0;
      f[2] = w > 1 ? -1.0 + 2.0 * c / (w - 1) : 0.0;
      f[3] = gx_max > 0.0 ? gx(r, c) / gx_max : 0.0;
      f[4] = gy_max > 0.0 ? gy(r, c) / gy_max : 0.0;
    }
  }
  return features;
}

DepthGrid ResidualInit(const DepthGrid& pseudo, const DepthGrid& residual,
                       double d_max) {
  RequireSameShape(pseudo, residual, "pseudo", "residual");
  if (!(d_max > 0.0)) Invalid("d_max must be > 0");
  DepthGrid out = pseudo;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(pseudo[i] + residual[i], 0.0, d_max);
  }
  return out;
}

DepthGrid ResidualInit(const DepthGrid& pseudo, double d_max) {
  return ResidualInit(pseudo, DepthGrid(pseudo.height(), pseudo.width(), 0.0),
                      d_max);
}

}  // namespace depthfuse
