// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "ditto/core/tensor.hpp"
#include "ditto/trainer/config.hpp"

namespace ditto::trainer {

using Rng = std::mt19937_64;

struct PatchPlacement {
  int y = 0;
  int x = 0;
};

/// Top-left corners of n square patches of side s, uniform over [0, H - s] x [0, W - s].
inline std::vector<PatchPlacement> place_patches(int height, int width, int n, int s, Rng& rng) {
  require(n >= 0 && s >= 1, ErrorKind::kInvalidArgument, "patch count must be >= 0 and side >= 1");
  require(s <= height && s <= width, ErrorKind::kInvalidArgument, "patch side exceeds the mask");
  std::uniform_int_distribution<int> py(0, height - s), px(0, width - s);
  std::vector<PatchPlacement> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int y = py(rng);
    out.push_back({y, px(rng)});
  }
  return out;
}

inline void stamp_patches(Tensor& mask, const std::vector<PatchPlacement>& patches, int s) {
  for (const auto& p : patches)
    for (int y = p.y; y < p.y + s; ++y)
      for (int x = p.x; x < p.x + s; ++x) mask(0, y, x) = 1.0;
}

/// Marks n random s x s squares as editable (1) on top of an existing 1 x H x W mask.
inline Tensor add_patch(const Tensor& mask, int n, int s, Rng& rng) {
  require(mask.channels() == 1, ErrorKind::kShapeMismatch, "add_patch expects a 1 x H x W mask");
  Tensor out = mask;
  if (n == 0) return out;
  stamp_patches(out, place_patches(mask.height(), mask.width(), n, s, rng), s);
  return out;
}

/// Square rendering dimension during refinement: grows linearly from base to
/// 2 * base between the refinement start and t_total.
inline std::pair<int, int> dimension_refine(int iteration, const TrainConfig& cfg) {
  const int start = cfg.refinement_start();
  require(iteration >= start, ErrorKind::kInvalidArgument, "dimension_refine called before refinement starts");
  const double span = cfg.t_total - start;
  const double rate = span > 0 ? std::min(1.0, (iteration - start) / span) : 1.0;
  const int side = static_cast<int>(std::lround(cfg.latent_side * (1.0 + rate)));
  return {side, side};
}

}  // namespace ditto::trainer
