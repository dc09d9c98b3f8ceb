// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ditto/core/error.hpp"

namespace ditto {

/// Dense channel-major (C, H, W) image tensor. Used for RGB images, depth
/// rasters, masks and 4-channel latents alike.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, double fill = 0.0)
      : c_(channels), h_(height), w_(width),
        data_(static_cast<std::size_t>(channels) * height * width, fill) {
    require(channels >= 0 && height >= 0 && width >= 0, ErrorKind::kInvalidArgument,
            "tensor dimensions must be nonnegative");
  }

  int channels() const noexcept { return c_; }
  int height() const noexcept { return h_; }
  int width() const noexcept { return w_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h_) * w_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int c, int y, int x) { return data_[index(c, y, x)]; }
  double operator()(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> channel(int c) { return {data_.data() + c * plane(), plane()}; }
  std::span<const double> channel(int c) const { return {data_.data() + c * plane(), plane()}; }

  bool same_shape(const Tensor& o) const noexcept { return c_ == o.c_ && h_ == o.h_ && w_ == o.w_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t index(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * h_ + y) * w_ + x;
  }

  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) fail(ErrorKind::kShapeMismatch, what);
}

/// Area-average pooling by an integer factor. Height and width must divide.
inline Tensor average_pool(const Tensor& in, int factor) {
  require(factor >= 1, ErrorKind::kInvalidArgument, "pool factor must be >= 1");
  require(in.height() % factor == 0 && in.width() % factor == 0, ErrorKind::kShapeMismatch,
          "pool factor must divide the tensor size");
  Tensor out(in.channels(), in.height() / factor, in.width() / factor);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int c = 0; c < in.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        double acc = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) acc += in(c, y * factor + dy, x * factor + dx);
        out(c, y, x) = acc * inv;
      }
    }
  }
  return out;
}

/// Nearest-neighbour upsampling by an integer factor.
inline Tensor upsample_nearest(const Tensor& in, int factor) {
  require(factor >= 1, ErrorKind::kInvalidArgument, "upsample factor must be >= 1");
  Tensor out(in.channels(), in.height() * factor, in.width() * factor);
  for (int c = 0; c < out.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) out(c, y, x) = in(c, y / factor, x / factor);
  return out;
}

/// Bilinear resize with pixel-center alignment (half-pixel convention).
inline Tensor resize_bilinear(const Tensor& in, int height, int width) {
  require(height > 0 && width > 0 && !in.empty(), ErrorKind::kInvalidArgument,
          "resize target must be positive and source nonempty");
  Tensor out(in.channels(), height, width);
  const double sy = static_cast<double>(in.height()) / height;
  const double sx = static_cast<double>(in.width()) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, in.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, in.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, in.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, in.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < in.channels(); ++c) {
        const double top = in(c, y0, x0) * (1 - tx) + in(c, y0, x1) * tx;
        const double bot = in(c, y1, x0) * (1 - tx) + in(c, y1, x1) * tx;
        out(c, y, x) = top * (1 - ty) + bot * ty;
      }
    }
  }
  return out;
}

inline double mean_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean_abs_diff: shape mismatch");
  if (a.empty()) return 0.0;
  double acc = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) acc += std::abs(da[i] - db[i]);
  return acc / static_cast<double>(da.size());
}

}  // namespace ditto
