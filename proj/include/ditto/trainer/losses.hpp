// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>

#include "ditto/core/tensor.hpp"
#include "ditto/trainer/config.hpp"

namespace ditto::trainer {

/// Scalar loss together with its gradient w.r.t. the loss input.
struct LossValue {
  double value = 0.0;
  Tensor grad;
};

/// Background weight of the reliability loss at iteration t.
inline double eta(double t, const TrainConfig& cfg) { return std::exp(-(t / cfg.eta_time_unit) / cfg.lambda_eta); }

/// Mean of [zeta * M + eta(t) * (1 - M)] * |z_r - z_p| over every element. M is 1 x H x W.
inline LossValue reliability_loss(const Tensor& z_r, const Tensor& z_p, const Tensor& mask, double t,
                                  const TrainConfig& cfg) {
  require_same_shape(z_r, z_p, "reliability_loss: rendered and pre-rendered latents differ in shape");
  require(mask.channels() == 1 && mask.height() == z_r.height() && mask.width() == z_r.width(),
          ErrorKind::kShapeMismatch, "reliability_loss: mask must be 1 x H x W at latent resolution");
  LossValue out{0.0, Tensor(z_r.channels(), z_r.height(), z_r.width())};
  if (z_r.empty()) return out;
  const double bg = eta(t, cfg);
  const double inv = 1.0 / static_cast<double>(z_r.size());
  for (int c = 0; c < z_r.channels(); ++c)
    for (int y = 0; y < z_r.height(); ++y)
      for (int x = 0; x < z_r.width(); ++x) {
        const double m = mask(0, y, x);
        const double w = cfg.zeta * m + bg * (1.0 - m);
        const double d = z_r(c, y, x) - z_p(c, y, x);
        out.value += w * std::abs(d);
        out.grad(c, y, x) = d > 0 ? w * inv : (d < 0 ? -w * inv : 0.0);
      }
  out.value *= inv;
  return out;
}

/// Mean binary entropy of the per-ray opacity, clipped to [eps, 1 - eps].
/// Minimizing it drives opacity toward 0 or 1.
inline LossValue sparsity_loss(const Tensor& alpha, const TrainConfig& cfg) {
  LossValue out{0.0, Tensor(alpha.channels(), alpha.height(), alpha.width())};
  if (alpha.empty()) return out;
  const double eps = cfg.eps_clip;
  const double inv = 1.0 / static_cast<double>(alpha.size());
  auto a = alpha.data();
  auto g = out.grad.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = std::clamp(a[i], eps, 1.0 - eps);
    acc += v * std::log(v) + (1.0 - v) * std::log1p(-v);
    // d/dv of the entropy is ln((1-v) / v); zero where the clip is active.
    g[i] = (a[i] < eps || a[i] > 1.0 - eps) ? 0.0 : std::log((1.0 - v) / v) * inv;
  }
  out.value = -acc * inv;
  return out;
}

}  // namespace ditto::trainer
