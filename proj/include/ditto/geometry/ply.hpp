// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "ditto/geometry/types.hpp"

namespace ditto::geometry {

namespace detail {

inline int to_byte(double c) { return static_cast<int>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); }

inline std::ofstream open_ply(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << std::setprecision(9);
  return out;
}

}  // namespace detail

inline void write_ply(const std::filesystem::path& path, const PointCloud& pc) {
  auto out = detail::open_ply(path);
  const bool colors = pc.colors.size() == pc.size();
  out << "ply\nformat ascii 1.0\nelement vertex " << pc.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (pc.has_normals()) out << "property float nx\nproperty float ny\nproperty float nz\n";
  if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto& p = pc.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (pc.has_normals()) out << ' ' << pc.normals[i].x() << ' ' << pc.normals[i].y() << ' ' << pc.normals[i].z();
    if (colors)
      out << ' ' << detail::to_byte(pc.colors[i].x()) << ' ' << detail::to_byte(pc.colors[i].y()) << ' '
          << detail::to_byte(pc.colors[i].z());
    out << '\n';
  }
}

inline void write_ply(const std::filesystem::path& path, const ScaffoldMesh& mesh) {
  auto out = detail::open_ply(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "property float density\n"
      << "element face " << mesh.faces.size() << "\nproperty list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& p = mesh.vertices[i];
    const Vec3 c = i < mesh.vertex_colors.size() ? mesh.vertex_colors[i] : Vec3::Constant(0.5);
    const double d = i < mesh.vertex_density.size() ? mesh.vertex_density[i] : 0.0;
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << detail::to_byte(c.x()) << ' '
        << detail::to_byte(c.y()) << ' ' << detail::to_byte(c.z()) << ' ' << d << '\n';
  }
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

/// Reads the ASCII mesh layout produced by write_ply(ScaffoldMesh).
inline ScaffoldMesh read_ply_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t n_vertices = 0, n_faces = 0;
  std::vector<std::string> props;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "element") {
      std::string kind;
      ls >> kind;
      in_vertex = kind == "vertex";
      (in_vertex ? n_vertices : n_faces) = [&] { std::size_t n = 0; ls >> n; return n; }();
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  ScaffoldMesh mesh;
  for (std::size_t i = 0; i < n_vertices; ++i) {
    Vec3 p = Vec3::Zero(), c = Vec3::Constant(0.5);
    double density = 0.0;
    for (const auto& name : props) {
      double v = 0.0;
      if (!(in >> v)) fail(ErrorKind::kIo, "truncated ply vertex list in " + path.string());
      if (name == "x") p.x() = v;
      else if (name == "y") p.y() = v;
      else if (name == "z") p.z() = v;
      else if (name == "red") c.x() = v / 255.0;
      else if (name == "green") c.y() = v / 255.0;
      else if (name == "blue") c.z() = v / 255.0;
      else if (name == "density") density = v;
    }
    mesh.vertices.push_back(p);
    mesh.vertex_colors.push_back(c);
    mesh.vertex_density.push_back(density);
  }
  for (std::size_t i = 0; i < n_faces; ++i) {
    int count = 0;
    std::array<int, 3> f{};
    if (!(in >> count >> f[0] >> f[1] >> f[2]) || count != 3)
      fail(ErrorKind::kIo, "unsupported or truncated ply face list in " + path.string());
    mesh.faces.push_back(f);
  }
  return mesh;
}

}  // namespace ditto::geometry
