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

#include "depthfuse/oracle.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "depthfuse/error.h"
#include "depthfuse/io.h"

namespace depthfuse::oracle {
namespace {

void RequireOracleSize(int height, int width) {
  if (static_cast<long>(height) * width > kMaxOraclePixels) {
    throw Error(ErrorCode::kSizeExceeded,
                "oracle accepts at most " + std::to_string(kMaxOraclePixels) +
                    " pixels, got " + ShapeString(height, width));
  }
}

bool IsBorder(int r, int c, int h, int w) {
  return r == 0 || c == 0 || r == h - 1 || c == w - 1;
}

// Hyperbolic helpers, written out independently of refine.cc.
std::vector<double> Embed(const FeatureGrid& f, int r, int c,
                          const RefineParams& params) {
  std::vector<double> v(params.w_f.rows, 0.0);
  for (int e = 0; e < params.w_f.rows; ++e) {
    for (int ch = 0; ch < params.w_f.cols; ++ch) {
      v[e] += params.w_f(e, ch) * f.at(r, c)[ch];
    }
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  const double norm = std::sqrt(norm2);
  if (norm == 0.0) return v;
  const double sk = std::sqrt(params.kappa);
  double t = std::tanh(sk * norm);
  if (t > 1.0 - 1e-7) t = 1.0 - 1e-7;
  for (double& x : v) x = x * t / (sk * norm);
  return v;
}

double Distance(const std::vector<double>& x, const std::vector<double>& y,
                double kappa) {
  // (-x) (+) y, term by term.
  double xy = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += -x[i] * y[i];
    x2 += x[i] * x[i];
    y2 += y[i] * y[i];
  }
  const double den = 1.0 + 2.0 * kappa * xy + kappa * kappa * x2 * y2;
  double n2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m =
        ((1.0 + 2.0 * kappa * xy + kappa * y2) * -x[i] + (1.0 - kappa * x2) * y[i]) /
        den;
    n2 += m * m;
  }
  const double sk = std::sqrt(kappa);
  double arg = sk * std::sqrt(n2);
  if (arg > 1.0 - 1e-7) arg = 1.0 - 1e-7;
  return 2.0 / sk * 0.5 * std::log((1.0 + arg) / (1.0 - arg));
}

}  // namespace

DenseSystem AssembleDenseSystem(const DepthGrid& sparse,
                                const DepthGrid& prior) {
  RequireSameShape(sparse, prior, "sparse", "prior");
  const int h = sparse.height();
  const int w = sparse.width();
  RequireMinimumShape(h, w);
  RequireOracleSize(h, w);

  std::vector<std::vector<int>> index(h, std::vector<int>(w, -1));
  DenseSystem system;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!IsBorder(r, c, h, w) && !(sparse(r, c) > 0.0)) {
        index[r][c] = static_cast<int>(system.unknown.size());
        system.unknown.push_back({r, c});
      }
    }
  }
  const std::size_t n = system.unknown.size();
  system.matrix.assign(n * n, 0.0);
  system.rhs.assign(n, 0.0);

  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  for (std::size_t i = 0; i < n; ++i) {
    const int r = system.unknown[i].row;
    const int c = system.unknown[i].col;
    system.matrix[i * n + i] = 4.0;
    double b = 4.0 * prior(r, c);
    for (int k = 0; k < 4; ++k) {
      const int qr = r + dr[k];
      const int qc = c + dc[k];
      b -= prior(qr, qc);
      if (index[qr][qc] >= 0) {
        system.matrix[i * n + index[qr][qc]] = -1.0;
      } else {
        // Known neighbour: move its Dirichlet value to the right-hand side.
        b += sparse(qr, qc) > 0.0 ? sparse(qr, qc) : prior(qr, qc);
      }
    }
    system.rhs[i] = b;
  }
  return system;
}

double DenseResidualInf(const DenseSystem& system,
                        const std::vector<double>& x) {
  const std::size_t n = system.dimension();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += system.at(i, j) * x[j];
    worst = std::max(worst, std::abs(ax - system.rhs[i]));
  }
  return worst;
}

std::vector<double> DenseSolveUnknowns(const DenseSystem& system) {
  const auto n = static_cast<Eigen::Index>(system.dimension());
  if (n == 0) return {};
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b(i) = system.rhs[i];
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = system.at(i, j);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericFailure,
                "dense Poisson matrix is not positive definite");
  }
  const Eigen::VectorXd x = llt.solve(b);
  return {x.data(), x.data() + n};
}

DepthGrid DensePoissonSolve(const DepthGrid& sparse, const DepthGrid& prior) {
  const DenseSystem system = AssembleDenseSystem(sparse, prior);
  const std::vector<double> x = DenseSolveUnknowns(system);
  const int h = sparse.height();
  const int w = sparse.width();
  DepthGrid out(h, w, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (sparse(r, c) > 0.0) {
        out(r, c) = sparse(r, c);
      } else if (IsBorder(r, c, h, w)) {
        out(r, c) = prior(r, c);
      }
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    out(system.unknown[i].row, system.unknown[i].col) = x[i];
  }
  return out;
}

DepthGrid ReferencePropagate(const DepthGrid& init, const DepthGrid& sensor,
                             const BinaryMask& mask,
                             const FeatureGrid& features,
                             const RefineParams& params) {
  RequireSameShape(init, sensor, "init", "sensor");
  RequireSameShape(init, mask, "init", "mask");
  RequireSameShape(init, features, "init", "features");
  params.Validate(features.channels());
  const int h = init.height();
  const int w = init.width();
  RequireOracleSize(h, w);

  DepthGrid current = init;
  for (int t = 0; t < params.iterations; ++t) {
    DepthGrid next(h, w, 0.0);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::vector<double> hp = Embed(features, r, c, params);

        std::vector<double> logits;
        for (std::size_t k = 0; k < params.kernel_sizes.size(); ++k) {
          double z = params.g_bias[k];
          for (int ch = 0; ch < features.channels(); ++ch) {
            z += params.g(static_cast<int>(k), ch) * features.at(r, c)[ch];
          }
          logits.push_back(z);
        }
        double zmax = logits[0];
        for (double z : logits) zmax = std::max(zmax, z);
        double zsum = 0.0;
        for (double z : logits) zsum += std::exp(z - zmax);

        double mixed = 0.0;
        for (std::size_t k = 0; k < params.kernel_sizes.size(); ++k) {
          const int half = params.kernel_sizes[k] / 2;
          double numer = 0.0;
          double denom = 0.0;
          for (int qr = r - half; qr <= r + half; ++qr) {
            for (int qc = c - half; qc <= c + half; ++qc) {
              if (qr < 0 || qr >= h || qc < 0 || qc >= w) continue;
              const double d =
                  Distance(hp, Embed(features, qr, qc, params), params.kappa);
              const double a = std::exp(-d / params.temperatures[k]);
              const double value =
                  (qr == r && qc == c) ? init(r, c) : current(qr, qc);
              numer += a * value;
              denom += a;
            }
          }
          const double gate = std::exp(logits[k] - zmax) / zsum;
          mixed += gate * (numer / denom);
        }

        double z = params.w_alpha_bias;
        for (int ch = 0; ch < features.channels(); ++ch) {
          z += params.w_alpha[ch] * features.at(r, c)[ch];
        }
        const double alpha = 1.0 / (1.0 + std::exp(-z));
        const double m = mask(r, c) ? 1.0 : 0.0;
        next(r, c) = (1.0 - alpha * m) * mixed + alpha * m * sensor(r, c);
      }
    }
    current = next;
  }
  for (double& v : current.values()) {
    if (v < 0.0) v = 0.0;
    if (v > params.d_max) v = params.d_max;
  }
  return current;
}

SyntheticScene SynthScene(int height, int width, std::uint64_t seed) {
  if (height < 8 || width < 8) {
    throw Error(ErrorCode::kDimensionTooSmall,
                "synthetic scenes need at least 8x8 pixels, got " +
                    ShapeString(height, width));
  }
  Xorshift64Star rng(seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * rng.Uniform();
  };
  const double two_pi = 2.0 * std::numbers::pi;

  // Ground truth: a tilted background plane plus a few raised or recessed
  // rectangles with their own tilt.
  const double base = uniform(10.0, 30.0);
  const double tilt_r = uniform(-8.0, 8.0);
  const double tilt_c = uniform(-8.0, 8.0);
  DepthGrid gt(height, width, 0.0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      gt(r, c) = base + tilt_r * r / height + tilt_c * c / width;
    }
  }
  const int boxes = 2 + static_cast<int>(rng.Below(3));
  for (int b = 0; b < boxes; ++b) {
    const int r0 = static_cast<int>(rng.Below(height / 2));
    const int c0 = static_cast<int>(rng.Below(width / 2));
    const int r1 = r0 + height / 8 + static_cast<int>(rng.Below(height / 3));
    const int c1 = c0 + width / 8 + static_cast<int>(rng.Below(width / 3));
    const double step = (rng.Below(2) ? 1.0 : -1.0) * uniform(2.0, 8.0);
    const double slope = uniform(-3.0, 3.0);
    for (int r = r0; r < std::min(r1, height); ++r) {
      for (int c = c0; c < std::min(c1, width); ++c) {
        gt(r, c) += step + slope * (c - c0) / width;
      }
    }
  }
  for (double& v : gt.values()) v = std::max(v, 1.0);

  // Prior: smooth gain around a global scale error, plus a smooth bias.
  const double gain0 = 1.0 + (rng.Below(2) ? 1.0 : -1.0) * uniform(0.15, 0.35);
  const double gain1 = uniform(0.05, 0.15);
  const double bias0 = (rng.Below(2) ? 1.0 : -1.0) * uniform(1.0, 4.0);
  const double bias1 = uniform(0.5, 2.0);
  const double fr1 = uniform(0.5, 1.5);
  const double fc1 = uniform(0.5, 1.5);
  const double fr2 = uniform(0.5, 1.5);
  const double fc2 = uniform(0.5, 1.5);
  const double ph1 = uniform(0.0, two_pi);
  const double ph2 = uniform(0.0, two_pi);
  DepthGrid prior(height, width, 0.0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double y = static_cast<double>(r) / height;
      const double x = static_cast<double>(c) / width;
      const double gain =
          gain0 + gain1 * std::sin(two_pi * fr1 * y + ph1) *
                      std::cos(two_pi * fc1 * x + ph2);
      const double bias =
          bias0 + bias1 * std::cos(two_pi * (fr2 * y + fc2 * x) + ph1 - ph2);
      prior(r, c) = std::max(gain * gt(r, c) + bias, 0.1);
    }
  }

  SparsitySpec spec;
  spec.mode = SparsityMode::kUniformRandom;
  spec.density = 0.06;
  spec.seed = seed ^ 0x5DEECE66Dull;
  auto [sparse, mask] = SynthSparse(gt, spec);
  return {std::move(gt), std::move(prior), std::move(sparse), std::move(mask),
          seed};
}

}  // namespace depthfuse::oracle
