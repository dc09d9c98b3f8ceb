// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ditto/core/tensor.hpp"
#include "ditto/geometry/types.hpp"
#include "ditto/prerender/pose.hpp"

namespace ditto::prerender {

struct RasterImage {
  Tensor rgb;    // 3 x R x R, white background
  Tensor depth;  // 1 x R x R, camera-space z, +inf where uncovered
  Tensor mask;   // 1 x R x R, 1 where covered
};

inline constexpr double kNearPlane = 1e-3;

/// Software z-buffer rasterizer. Pixel (u, v) samples the image plane at its
/// integer coordinate, matching geometry::project. Colors and depth are
/// interpolated perspective-correctly; triangles touching the near plane are dropped.
inline RasterImage rasterize(const geometry::ScaffoldMesh& mesh, const CameraPose& pose,
                             const geometry::CameraIntrinsics& K, int resolution) {
  require(resolution > 0, ErrorKind::kInvalidArgument, "resolution must be positive");
  pose.validate();
  const double inf = std::numeric_limits<double>::infinity();
  RasterImage out{Tensor(3, resolution, resolution, 1.0), Tensor(1, resolution, resolution, inf),
                  Tensor(1, resolution, resolution, 0.0)};
  if (mesh.empty()) return out;

  const auto frame = pose.frame();
  struct Projected {
    double u, v, inv_z;
  };
  std::vector<Projected> proj(mesh.vertices.size());
  std::vector<Vec3> cam(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    cam[i] = frame.to_camera(mesh.vertices[i]);
    const double z = cam[i].z();
    proj[i] = z > kNearPlane ? Projected{K.fx * cam[i].x() / z + K.cx, K.fy * cam[i].y() / z + K.cy, 1.0 / z}
                             : Projected{0, 0, -1};
  }
  const bool has_color = mesh.vertex_colors.size() == mesh.vertices.size();

  for (const auto& f : mesh.faces) {
    const Projected& a = proj[f[0]];
    const Projected& b = proj[f[1]];
    const Projected& c = proj[f[2]];
    if (a.inv_z <= 0 || b.inv_z <= 0 || c.inv_z <= 0) continue;
    const double area = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
    if (area == 0.0) continue;
    const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({a.u, b.u, c.u}))));
    const int x1 = std::min(resolution - 1, static_cast<int>(std::floor(std::max({a.u, b.u, c.u}))));
    const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({a.v, b.v, c.v}))));
    const int y1 = std::min(resolution - 1, static_cast<int>(std::floor(std::max({a.v, b.v, c.v}))));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        // Screen-space barycentrics, sign-normalized by the triangle area.
        const double w0 = ((b.u - x) * (c.v - y) - (b.v - y) * (c.u - x)) / area;
        const double w1 = ((c.u - x) * (a.v - y) - (c.v - y) * (a.u - x)) / area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        const double inv_z = w0 * a.inv_z + w1 * b.inv_z + w2 * c.inv_z;
        const double z = 1.0 / inv_z;
        if (!(z < out.depth(0, y, x))) continue;
        out.depth(0, y, x) = z;
        out.mask(0, y, x) = 1.0;
        if (has_color) {
          const double pa = w0 * a.inv_z * z, pb = w1 * b.inv_z * z, pc = w2 * c.inv_z * z;
          for (int ch = 0; ch < 3; ++ch)
            out.rgb(ch, y, x) = pa * mesh.vertex_colors[f[0]][ch] + pb * mesh.vertex_colors[f[1]][ch] +
                                pc * mesh.vertex_colors[f[2]][ch];
        } else {
          for (int ch = 0; ch < 3; ++ch) out.rgb(ch, y, x) = 0.5;
        }
      }
    }
  }
  return out;
}

}  // namespace ditto::prerender
