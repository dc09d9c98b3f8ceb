// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ditto/geometry/camera.hpp"
#include "ditto/geometry/cleaning.hpp"
#include "ditto/geometry/poisson.hpp"
#include "ditto/prerender/pose.hpp"

namespace ditto::prerender {

struct ScaffoldOptions {
  geometry::CameraIntrinsics intrinsics = geometry::default_intrinsics();  // at base_side
  int base_side = 512;
  bool metric_depth = false;  // depth is camera z in scene units; otherwise relative
  int outlier_neighbors = 5;
  double outlier_std_ratio = 1.0;
  int normal_neighbors = 16;
  int grid_depth = 7;
  double trim_quantile = 0.1;
  double white_threshold = 250.0 / 255.0;  // pixels this bright in every channel are background
};

/// Marks near-white pixels as invalid so the backdrop never enters the point cloud.
inline geometry::RgbdImage drop_white_background(geometry::RgbdImage img, double threshold) {
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      bool white = true;
      for (int c = 0; c < 3; ++c) white = white && img.rgb(c, y, x) >= threshold;
      if (white) img.depth(0, y, x) = 0.0;
    }
  return img;
}

/// Point cloud of a single RGB-D capture placed in world space as seen from `camera`.
/// Relative depth is scaled to a unit bounding-box diagonal and centered on the look-at point.
inline geometry::PointCloud scaffold_points(const geometry::RgbdImage& image, const CameraPose& camera,
                                            const ScaffoldOptions& opt) {
  image.validate();
  require(image.width() == image.height(), ErrorKind::kShapeMismatch, "scaffold input must be square");
  const auto K = opt.intrinsics.scaled(opt.base_side, image.width());
  const auto rgbd = drop_white_background(image, opt.white_threshold);
  const double scale = opt.metric_depth ? 1.0 : geometry::depth_scale_for_diagonal(rgbd, K, 1.0);
  geometry::PointCloud pc = geometry::unproject(rgbd, K, scale);
  pc = geometry::remove_outliers(pc, opt.outlier_neighbors, opt.outlier_std_ratio);
  pc = geometry::estimate_normals(pc, opt.normal_neighbors);

  Vec3 shift = Vec3::Zero();
  if (!opt.metric_depth) {
    Vec3 lo = pc.points.front(), hi = pc.points.front();
    for (const auto& p : pc.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    shift = Vec3(0.0, 0.0, camera.radius) - 0.5 * (lo + hi);
  }
  const auto frame = camera.frame();
  for (auto& p : pc.points) p = frame.to_world(p + shift);
  for (auto& n : pc.normals) n = frame.direction_to_world(n);
  return pc;
}

/// The in-boundary scaffold mesh: cleaned, oriented, Poisson-reconstructed and density-trimmed.
inline geometry::ScaffoldMesh build_scaffold(const geometry::RgbdImage& image, const CameraPose& camera,
                                             const ScaffoldOptions& opt = {}) {
  const auto pc = scaffold_points(image, camera, opt);
  geometry::PoissonOptions po;
  po.grid_depth = opt.grid_depth;
  return geometry::trim_low_density(geometry::poisson_reconstruct(pc, po), opt.trim_quantile);
}

}  // namespace ditto::prerender
