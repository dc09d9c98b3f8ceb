// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <utility>

#include "ditto/geometry/types.hpp"

namespace ditto::geometry {

struct EdgeCensus {
  std::size_t edges = 0;
  std::size_t boundary = 0;      // used by one face
  std::size_t non_manifold = 0;  // used by three or more faces
};

inline EdgeCensus edge_census(const ScaffoldMesh& mesh) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) ++uses[std::minmax(f[e], f[(e + 1) % 3])];
  EdgeCensus c;
  c.edges = uses.size();
  for (const auto& [edge, n] : uses) {
    if (n == 1) ++c.boundary;
    if (n > 2) ++c.non_manifold;
  }
  return c;
}

/// Every edge shared by exactly two faces.
inline bool is_watertight(const ScaffoldMesh& mesh) {
  const auto c = edge_census(mesh);
  return !mesh.faces.empty() && c.boundary == 0 && c.non_manifold == 0;
}

/// V - E + F over referenced vertices only.
inline long euler_characteristic(const ScaffoldMesh& mesh) {
  std::vector<char> used(mesh.vertices.size(), 0);
  for (const auto& f : mesh.faces)
    for (int i : f) used[i] = 1;
  long v = 0;
  for (char u : used) v += u;
  return v - static_cast<long>(edge_census(mesh).edges) + static_cast<long>(mesh.faces.size());
}

}  // namespace ditto::geometry
