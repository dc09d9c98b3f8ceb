// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ditto/core/error.hpp"
#include "ditto/core/tensor.hpp"

namespace ditto::geometry {

using Vec3 = Eigen::Vector3d;

/// Pinhole intrinsics in pixels. Skew is carried for completeness and must be zero.
struct CameraIntrinsics {
  double fx = 640.0;
  double fy = 640.0;
  double cx = 256.0;
  double cy = 256.0;
  double skew = 0.0;

  void validate(int width, int height) const {
    require(fx > 0 && fy > 0, ErrorKind::kInvalidArgument, "focal lengths must be positive");
    require(skew == 0.0, ErrorKind::kInvalidArgument, "skew must be zero");
    require(cx >= 0 && cx < width && cy >= 0 && cy < height, ErrorKind::kInvalidArgument,
            "principal point outside the image");
  }

  /// The same field of view re-targeted to a square image of side `res`,
  /// keeping pixel centers aligned under area pooling.
  CameraIntrinsics scaled(int base_res, int res) const {
    const double s = static_cast<double>(res) / base_res;
    return {fx * s, fy * s, (cx + 0.5) * s - 0.5, (cy + 0.5) * s - 0.5, 0.0};
  }
};

/// 45mm-equivalent focal length on a 36mm sensor at 512 px, principal point at the center.
inline CameraIntrinsics default_intrinsics() { return {512.0 * 45.0 / 36.0, 512.0 * 45.0 / 36.0, 256.0, 256.0, 0.0}; }

/// RGB image plus relative depth. A pixel is valid when its depth is finite and positive.
struct RgbdImage {
  Tensor rgb;    // 3 x H x W in [0,1]
  Tensor depth;  // 1 x H x W

  int width() const { return rgb.width(); }
  int height() const { return rgb.height(); }
  bool valid(int y, int x) const {
    const double d = depth(0, y, x);
    return std::isfinite(d) && d > 0.0;
  }

  void validate() const {
    require(rgb.channels() == 3 && depth.channels() == 1, ErrorKind::kShapeMismatch,
            "rgbd needs a 3-channel image and a 1-channel depth");
    require(rgb.height() == depth.height() && rgb.width() == depth.width(), ErrorKind::kShapeMismatch,
            "rgb and depth resolutions differ");
  }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> colors;
  std::vector<Vec3> normals;               // empty or one per point
  std::vector<std::uint8_t> normal_flags;  // 1 = degenerate neighbourhood, normal is a placeholder

  std::size_t size() const { return points.size(); }
  bool has_normals() const { return !normals.empty(); }
};

struct ScaffoldMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> vertex_colors;
  std::vector<std::array<int, 3>> faces;
  std::vector<double> vertex_density;

  bool empty() const { return vertices.empty() || faces.empty(); }

  bool valid() const {
    const int n = static_cast<int>(vertices.size());
    for (const auto& f : faces) {
      for (int i : f)
        if (i < 0 || i >= n) return false;
      if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) return false;
    }
    for (double d : vertex_density)
      if (!(d >= 0.0)) return false;
    return true;
  }
};

}  // namespace ditto::geometry
