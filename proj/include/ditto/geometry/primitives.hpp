// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <utility>

#include "ditto/geometry/types.hpp"

namespace ditto::geometry {

/// Subdivided icosahedron projected onto a sphere. `color` maps a unit
/// direction to a vertex color; vertex density is set to 1.
inline ScaffoldMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero(),
                                   const std::function<Vec3(const Vec3&)>& color = {}) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      mid.emplace(key, static_cast<int>(v.size()) - 1);
      return static_cast<int>(v.size()) - 1;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  ScaffoldMesh mesh;
  mesh.faces = std::move(f);
  for (const auto& dir : v) {
    mesh.vertices.push_back(center + radius * dir);
    mesh.vertex_colors.push_back(color ? color(dir) : Vec3::Constant(0.5));
    mesh.vertex_density.push_back(1.0);
  }
  return mesh;
}

/// Deterministic, near-uniform oriented samples of a sphere (Fibonacci lattice).
inline PointCloud sample_sphere(int count, double radius = 1.0, const Vec3& center = Vec3::Zero()) {
  PointCloud pc;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(r * std::cos(golden * i), r * std::sin(golden * i), z);
    pc.points.push_back(center + radius * dir);
    pc.normals.push_back(dir);
    pc.colors.push_back(Vec3::Constant(0.5));
  }
  return pc;
}

/// Oriented samples of an axis-aligned cube surface, split evenly over the six faces
/// on a jittered-free regular grid per face.
inline PointCloud sample_cube(int count, double side = 1.0, const Vec3& center = Vec3::Zero()) {
  PointCloud pc;
  const int per_face = std::max(1, count / 6);
  const int m = std::max(1, static_cast<int>(std::round(std::sqrt(static_cast<double>(per_face)))));
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign : {-1, 1}) {
      const int u_axis = (axis + 1) % 3, v_axis = (axis + 2) % 3;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          Vec3 p = Vec3::Zero();
          p[axis] = 0.5 * sign * side;
          p[u_axis] = ((a + 0.5) / m - 0.5) * side;
          p[v_axis] = ((b + 0.5) / m - 0.5) * side;
          Vec3 n = Vec3::Zero();
          n[axis] = sign;
          pc.points.push_back(center + p);
          pc.normals.push_back(n);
          pc.colors.push_back(Vec3::Constant(0.5));
        }
    }
  }
  return pc;
}

inline double surface_area(const ScaffoldMesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces)
    area += 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm();
  return area;
}

}  // namespace ditto::geometry
