// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <optional>

#include "ditto/geometry/types.hpp"

namespace ditto::geometry {

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Camera-frame point (x right, y down, z forward) to pixel coordinates.
/// Pixel (u, v) samples the continuous image plane at its integer coordinate.
inline std::optional<PixelCoord> project(const Vec3& p, const CameraIntrinsics& K) {
  if (!(p.z() > 0.0)) return std::nullopt;
  return PixelCoord{K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

/// Unit-depth ray direction (z = 1) through a pixel coordinate.
inline Vec3 pixel_ray(double u, double v, const CameraIntrinsics& K) {
  return {(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0};
}

/// One point per valid pixel, z = depth_scale * depth(u, v).
inline PointCloud unproject(const RgbdImage& image, const CameraIntrinsics& K, double depth_scale) {
  image.validate();
  K.validate(image.width(), image.height());
  require(depth_scale > 0.0 && std::isfinite(depth_scale), ErrorKind::kInvalidArgument,
          "depth_scale must be positive");
  PointCloud pc;
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) {
      if (!image.valid(v, u)) continue;
      const double z = depth_scale * image.depth(0, v, u);
      pc.points.push_back(pixel_ray(u, v, K) * z);
      pc.colors.emplace_back(image.rgb(0, v, u), image.rgb(1, v, u), image.rgb(2, v, u));
    }
  }
  if (pc.points.empty()) fail(ErrorKind::kEmptyInput, "unproject: no valid depth pixels");
  return pc;
}

/// Depth scale that makes the unprojected cloud's bounding-box diagonal equal to `diagonal`.
/// Every coordinate is linear in the depth scale, so one unit-scale pass fixes it.
inline double depth_scale_for_diagonal(const RgbdImage& image, const CameraIntrinsics& K, double diagonal = 1.0) {
  const PointCloud unit = unproject(image, K, 1.0);
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : unit.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  require(diag > 0.0, ErrorKind::kEmptyInput, "depth_scale_for_diagonal: degenerate point set");
  return diagonal / diag;
}

/// Orthonormal camera frame in world space. Columns of the rotation are the
/// camera axes (right, down, forward) expressed in world coordinates.
struct CameraFrame {
  Vec3 position = Vec3::Zero();
  Vec3 right = Vec3::UnitX();
  Vec3 down = Vec3::UnitY();
  Vec3 forward = Vec3::UnitZ();

  Vec3 to_camera(const Vec3& world) const {
    const Vec3 d = world - position;
    return {d.dot(right), d.dot(down), d.dot(forward)};
  }
  Vec3 to_world(const Vec3& cam) const { return position + right * cam.x() + down * cam.y() + forward * cam.z(); }
  Vec3 direction_to_world(const Vec3& cam) const { return right * cam.x() + down * cam.y() + forward * cam.z(); }
};

/// Look-at frame with world +Z as up. Falls back to +Y up when looking straight along Z.
inline CameraFrame look_at(const Vec3& eye, const Vec3& target) {
  CameraFrame f;
  f.position = eye;
  f.forward = (target - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(f.forward.dot(up)) > 1.0 - 1e-9) up = Vec3::UnitY();
  f.right = f.forward.cross(up).normalized();
  f.down = f.forward.cross(f.right).normalized();
  return f;
}

}  // namespace ditto::geometry
