// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ditto/geometry/mc_tables.hpp"
#include "ditto/geometry/types.hpp"

namespace ditto::geometry {

/// Scalar samples on a regular cubic lattice of n^3 nodes; node (i,j,k) sits at
/// origin + spacing * (i,j,k).
struct ScalarGrid {
  int n = 0;
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;
  std::vector<double> values;

  ScalarGrid() = default;
  ScalarGrid(int n_, Vec3 origin_, double spacing_, double fill = 0.0)
      : n(n_), origin(std::move(origin_)), spacing(spacing_),
        values(static_cast<std::size_t>(n_) * n_ * n_, fill) {}

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k);
  }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  Vec3 node(int i, int j, int k) const { return origin + spacing * Vec3(i, j, k); }

  /// Trilinear interpolation; positions outside the lattice clamp to it.
  double sample(const Vec3& p) const {
    const Vec3 g = (p - origin) / spacing;
    int i0[3];
    double t[3];
    for (int a = 0; a < 3; ++a) {
      const double c = std::clamp(g[a], 0.0, n - 1.0);
      i0[a] = std::min(static_cast<int>(c), n - 2);
      t[a] = c - i0[a];
    }
    double acc = 0.0;
    for (int c = 0; c < 8; ++c) {
      const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
      const double w = (dx ? t[0] : 1 - t[0]) * (dy ? t[1] : 1 - t[1]) * (dz ? t[2] : 1 - t[2]);
      acc += w * at(i0[0] + dx, i0[1] + dy, i0[2] + dz);
    }
    return acc;
  }
};

struct IsoSurface {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

/// Marching cubes over every cell of the grid. Vertices are shared through a
/// per-lattice-edge key, so adjacent cells stitch into one connected mesh.
/// Faces are wound counter-clockwise seen from the side where values exceed `iso`.
inline IsoSurface marching_cubes(const ScalarGrid& grid, double iso) {
  static constexpr std::array<std::array<int, 3>, 8> kCorner = {{
      {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}};
  static constexpr std::array<std::array<int, 2>, 12> kEdge = {{
      {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

  IsoSurface out;
  std::unordered_map<std::uint64_t, int> edge_vertex;
  const int n = grid.n;
  for (int k = 0; k + 1 < n; ++k) {
    for (int j = 0; j + 1 < n; ++j) {
      for (int i = 0; i + 1 < n; ++i) {
        double v[8];
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          v[c] = grid.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          if (v[c] <= iso) cube |= 1 << c;
        }
        if (mc::kEdgeTable[cube] == 0) continue;
        int ids[12];
        for (int e = 0; e < 12; ++e) {
          if (!(mc::kEdgeTable[cube] & (1 << e))) continue;
          const auto& ca = kCorner[kEdge[e][0]];
          const auto& cb = kCorner[kEdge[e][1]];
          int axis = 0;
          while (ca[axis] == cb[axis]) ++axis;
          std::array<int, 3> base = ca[axis] < cb[axis] ? ca : cb;
          const std::uint64_t key =
              (static_cast<std::uint64_t>(grid.index(i + base[0], j + base[1], k + base[2])) << 2) |
              static_cast<std::uint64_t>(axis);
          auto [it, inserted] = edge_vertex.try_emplace(key, static_cast<int>(out.vertices.size()));
          if (inserted) {
            const double va = v[kEdge[e][0]], vb = v[kEdge[e][1]];
            const double t = va == vb ? 0.5 : std::clamp((iso - va) / (vb - va), 0.0, 1.0);
            const Vec3 pa = grid.node(i + ca[0], j + ca[1], k + ca[2]);
            const Vec3 pb = grid.node(i + cb[0], j + cb[1], k + cb[2]);
            out.vertices.push_back(pa + t * (pb - pa));
          }
          ids[e] = it->second;
        }
        for (int m = 0; mc::kTriTable[cube][m] != -1; m += 3)
          out.faces.push_back({ids[mc::kTriTable[cube][m]], ids[mc::kTriTable[cube][m + 2]],
                               ids[mc::kTriTable[cube][m + 1]]});
      }
    }
  }
  return out;
}

}  // namespace ditto::geometry
