// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ditto/geometry/kdtree.hpp"
#include "ditto/geometry/marching_cubes.hpp"
#include "ditto/geometry/types.hpp"

namespace ditto::geometry {

struct PoissonOptions {
  int grid_depth = 7;           // lattice side is 2^grid_depth nodes
  double padding = 1.25;        // lattice side relative to the point bounding box
  int coarsest_depth = 4;       // cascadic solve starts here
  double cg_tolerance = 1e-6;   // relative residual on the finest level
  int max_iterations = 4000;    // per level
  int density_depth_offset = 2; // support counts are splatted on a coarser lattice
};

namespace detail {

inline void splat_trilinear(ScalarGrid& grid, const Vec3& grid_coord, double w) {
  int i0[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const double c = std::clamp(grid_coord[a], 0.0, grid.n - 1.0);
    i0[a] = std::min(static_cast<int>(c), grid.n - 2);
    t[a] = c - i0[a];
  }
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    grid.at(i0[0] + dx, i0[1] + dy, i0[2] + dz) +=
        w * (dx ? t[0] : 1 - t[0]) * (dy ? t[1] : 1 - t[1]) * (dz ? t[2] : 1 - t[2]);
  }
}

/// y = (6x - sum of 6 neighbours) on interior nodes; boundary nodes stay zero.
inline void apply_laplacian(const ScalarGrid& x, std::vector<double>& y) {
  const int n = x.n;
  const std::size_t sx = 1, sy = n, sz = static_cast<std::size_t>(n) * n;
  std::fill(y.begin(), y.end(), 0.0);
  for (int k = 1; k + 1 < n; ++k)
    for (int j = 1; j + 1 < n; ++j) {
      const std::size_t row = x.index(0, j, k);
      for (int i = 1; i + 1 < n; ++i) {
        const std::size_t id = row + i;
        const double* v = x.values.data();
        y[id] = 6.0 * v[id] - v[id - sx] - v[id + sx] - v[id - sy] - v[id + sy] - v[id - sz] - v[id + sz];
      }
    }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Conjugate gradients for the Dirichlet Laplacian, warm-started from x.
inline CgResult solve_cg(ScalarGrid& x, const std::vector<double>& b, double tol, int max_iter) {
  const std::size_t m = b.size();
  std::vector<double> r(m), ap(m);
  ScalarGrid p(x.n, x.origin, x.spacing);
  apply_laplacian(x, ap);
  for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - ap[i];
  p.values = r;
  const double bnorm = std::sqrt(dot(b, b));
  CgResult res;
  if (bnorm == 0.0) {
    std::fill(x.values.begin(), x.values.end(), 0.0);
    res.converged = true;
    return res;
  }
  double rr = dot(r, r);
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    res.relative_residual = std::sqrt(rr) / bnorm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    apply_laplacian(p, ap);
    const double pap = dot(p.values, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < m; ++i) {
      x.values[i] += alpha * p.values[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < m; ++i) p.values[i] = r[i] + beta * p.values[i];
  }
  res.relative_residual = std::sqrt(rr) / bnorm;
  res.converged = res.relative_residual <= tol;
  return res;
}

struct Lattice {
  Vec3 origin;
  double side = 0.0;

  ScalarGrid make(int depth, double fill = 0.0) const {
    const int n = 1 << depth;
    return {n, origin, side / (n - 1), fill};
  }
};

/// Right-hand side -h^2 div V, with V splatted on the three face-staggered lattices.
inline std::vector<double> poisson_rhs(const ScalarGrid& like, const std::vector<Vec3>& pts,
                                       const std::vector<Vec3>& normals, double weight) {
  const int n = like.n;
  const double h = like.spacing;
  const double inv_h3 = 1.0 / (h * h * h);
  std::vector<double> rhs(like.values.size(), 0.0);
  for (int a = 0; a < 3; ++a) {
    ScalarGrid field(n, like.origin, h);
    Vec3 shift = Vec3::Zero();
    shift[a] = 0.5;
    for (std::size_t s = 0; s < pts.size(); ++s)
      splat_trilinear(field, (pts[s] - like.origin) / h - shift, weight * normals[s][a] * inv_h3);
    // Staggered value with index m along axis a sits between nodes m and m+1.
    for (int k = 1; k + 1 < n; ++k)
      for (int j = 1; j + 1 < n; ++j)
        for (int i = 1; i + 1 < n; ++i) {
          int idx[3] = {i, j, k};
          const double fwd = field.at(i, j, k);
          idx[a] -= 1;
          const double bwd = field.at(idx[0], idx[1], idx[2]);
          rhs[like.index(i, j, k)] -= h * (fwd - bwd);
        }
  }
  return rhs;
}

}  // namespace detail

/// Result of the implicit solve, kept for diagnostics and tests.
struct PoissonSolution {
  ScalarGrid chi;
  double iso = 0.0;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves lap(chi) = div(V) on a regular lattice by cascadic CG (coarse levels
/// warm-start finer ones). Flagged normals carry zero weight.
inline PoissonSolution solve_indicator(const PointCloud& pc, const PoissonOptions& opt) {
  require(pc.has_normals() && pc.normals.size() == pc.size(), ErrorKind::kInvalidArgument,
          "poisson_reconstruct needs one normal per point");
  require(pc.size() >= 100, ErrorKind::kEmptyInput, "poisson_reconstruct needs at least 100 points");
  require(opt.grid_depth >= 2 && opt.grid_depth <= 9, ErrorKind::kInvalidArgument,
          "grid_depth must be in [2, 9] for the dense lattice");
  std::vector<Vec3> pts, nrm;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (!pc.normal_flags.empty() && pc.normal_flags[i]) continue;
    require(std::abs(pc.normals[i].norm() - 1.0) <= 1e-6, ErrorKind::kInvalidArgument,
            "poisson_reconstruct needs unit normals");
    pts.push_back(pc.points[i]);
    nrm.push_back(pc.normals[i]);
  }
  require(pts.size() >= 100, ErrorKind::kEmptyInput, "fewer than 100 points with usable normals");

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (const auto& p : pc.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = (hi - lo).maxCoeff();
  require(extent > 0.0, ErrorKind::kInvalidArgument, "point cloud has zero extent");
  detail::Lattice lattice{0.5 * (lo + hi) - Vec3::Constant(0.5 * extent * opt.padding), extent * opt.padding};
  const double weight = 1.0 / static_cast<double>(pts.size());

  PoissonSolution sol;
  const int first = std::min(opt.coarsest_depth, opt.grid_depth);
  ScalarGrid chi;
  for (int depth = first; depth <= opt.grid_depth; ++depth) {
    ScalarGrid level = lattice.make(depth);
    if (!chi.values.empty()) {
      for (int k = 1; k + 1 < level.n; ++k)
        for (int j = 1; j + 1 < level.n; ++j)
          for (int i = 1; i + 1 < level.n; ++i) level.at(i, j, k) = chi.sample(level.node(i, j, k));
    }
    const auto rhs = detail::poisson_rhs(level, pts, nrm, weight);
    const bool finest = depth == opt.grid_depth;
    const auto cg = detail::solve_cg(level, rhs, finest ? opt.cg_tolerance : 1e-3, opt.max_iterations);
    sol.iterations += cg.iterations;
    sol.relative_residual = cg.relative_residual;
    if (finest && !cg.converged) {
      std::ostringstream msg;
      msg << "poisson solve did not converge after " << cg.iterations
          << " iterations, relative residual " << cg.relative_residual;
      fail(ErrorKind::kNotConverged, msg.str());
    }
    chi = std::move(level);
  }
  double iso = 0.0;
  for (const auto& p : pts) iso += chi.sample(p);
  sol.iso = iso / static_cast<double>(pts.size());
  sol.chi = std::move(chi);
  return sol;
}

/// Splatted sample-support counts on a coarser lattice over the same domain.
inline ScalarGrid support_density(const PointCloud& pc, const ScalarGrid& fine, int depth_offset) {
  int coarse_n = fine.n;
  for (int i = 0; i < depth_offset && coarse_n > 4; ++i) coarse_n /= 2;
  const double side = fine.spacing * (fine.n - 1);
  ScalarGrid density(coarse_n, fine.origin, side / (coarse_n - 1));
  for (const auto& p : pc.points) detail::splat_trilinear(density, (p - density.origin) / density.spacing, 1.0);
  return density;
}

inline ScaffoldMesh poisson_reconstruct(const PointCloud& pc, const PoissonOptions& opt = {}) {
  PoissonSolution sol = solve_indicator(pc, opt);
  IsoSurface iso = marching_cubes(sol.chi, sol.iso);

  ScaffoldMesh mesh;
  mesh.vertices = std::move(iso.vertices);
  mesh.faces = std::move(iso.faces);
  const ScalarGrid density = support_density(pc, sol.chi, opt.density_depth_offset);
  mesh.vertex_density.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) mesh.vertex_density.push_back(std::max(0.0, density.sample(v)));

  mesh.vertex_colors.assign(mesh.vertices.size(), Vec3::Constant(0.5));
  if (pc.colors.size() == pc.size()) {
    KdTree tree(pc.points);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
      mesh.vertex_colors[i] = pc.colors[tree.nearest(mesh.vertices[i]).index];
  }
  return mesh;
}

/// Removes vertices whose density lies strictly below the given quantile
/// (linear interpolation between order statistics) and every incident face.
inline ScaffoldMesh trim_low_density(const ScaffoldMesh& mesh, double quantile) {
  require(quantile >= 0.0 && quantile <= 1.0, ErrorKind::kInvalidArgument, "quantile must lie in [0, 1]");
  require(mesh.vertex_density.size() == mesh.vertices.size(), ErrorKind::kInvalidArgument,
          "mesh has no vertex density");
  if (mesh.vertices.empty()) return mesh;
  std::vector<double> sorted = mesh.vertex_density;
  std::sort(sorted.begin(), sorted.end());
  const double pos = quantile * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double threshold = sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);

  ScaffoldMesh out;
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (mesh.vertex_density[i] < threshold) continue;
    remap[i] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[i]);
    out.vertex_density.push_back(mesh.vertex_density[i]);
    if (mesh.vertex_colors.size() == mesh.vertices.size()) out.vertex_colors.push_back(mesh.vertex_colors[i]);
  }
  for (const auto& f : mesh.faces) {
    if (remap[f[0]] < 0 || remap[f[1]] < 0 || remap[f[2]] < 0) continue;
    out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }
  return out;
}

}  // namespace ditto::geometry
