// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

#include "ditto/geometry/kdtree.hpp"
#include "ditto/geometry/types.hpp"

namespace ditto::geometry {

/// Per-point mean distance to the k nearest other points.
inline std::vector<double> mean_knn_distance(const PointCloud& pc, int k) {
  KdTree tree(pc.points);
  std::vector<double> stat(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto nn = tree.knn(pc.points[i], k, static_cast<int>(i));
    double acc = 0.0;
    for (const auto& n : nn) acc += std::sqrt(n.dist2);
    stat[i] = acc / k;
  }
  return stat;
}

/// Statistical outlier removal: keeps a point iff its mean k-NN distance is at
/// most mean + std_ratio * std of that statistic over the whole cloud.
inline PointCloud remove_outliers(const PointCloud& pc, int k_neighbors = 5, double std_ratio = 1.0) {
  require(k_neighbors >= 1, ErrorKind::kInvalidArgument, "k_neighbors must be >= 1");
  if (pc.size() < static_cast<std::size_t>(k_neighbors) + 1)
    fail(ErrorKind::kEmptyInput, "remove_outliers: fewer than k_neighbors + 1 points");

  const auto stat = mean_knn_distance(pc, k_neighbors);
  double mean = 0.0;
  for (double s : stat) mean += s;
  mean /= static_cast<double>(stat.size());
  double var = 0.0;
  for (double s : stat) var += (s - mean) * (s - mean);
  // Differences below 1e-9 of the cloud scale (at least one scene unit) are ties, so
  // round-off and sub-resolution jitter never split an otherwise uniform cloud.
  Vec3 lo = pc.points.front(), hi = lo;
  for (const auto& p : pc.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double tie = 1e-9 * std::max(1.0, (hi - lo).norm());
  const double threshold = mean + std_ratio * std::sqrt(var / static_cast<double>(stat.size())) + tie;

  PointCloud out;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (stat[i] > threshold) continue;
    out.points.push_back(pc.points[i]);
    if (!pc.colors.empty()) out.colors.push_back(pc.colors[i]);
    if (pc.has_normals()) out.normals.push_back(pc.normals[i]);
    if (!pc.normal_flags.empty()) out.normal_flags.push_back(pc.normal_flags[i]);
  }
  return out;
}

/// PCA normals from the k-NN covariance (the point itself included), oriented
/// toward the camera origin. Rank-deficient neighbourhoods get (0,0,-1) and a flag.
inline PointCloud estimate_normals(const PointCloud& pc, int k_neighbors = 16) {
  require(k_neighbors >= 2, ErrorKind::kInvalidArgument, "k_neighbors must be >= 2");
  if (pc.size() < static_cast<std::size_t>(k_neighbors) + 1)
    fail(ErrorKind::kEmptyInput, "estimate_normals: fewer than k_neighbors + 1 points");

  PointCloud out = pc;
  out.normals.assign(pc.size(), Vec3(0, 0, -1));
  out.normal_flags.assign(pc.size(), 0);
  KdTree tree(pc.points);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto nn = tree.knn(pc.points[i], k_neighbors, static_cast<int>(i));
    Vec3 mean = pc.points[i];
    for (const auto& n : nn) mean += pc.points[n.index];
    mean /= static_cast<double>(nn.size() + 1);
    Eigen::Matrix3d cov = (pc.points[i] - mean) * (pc.points[i] - mean).transpose();
    for (const auto& n : nn) {
      const Vec3 d = pc.points[n.index] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Vec3 ev = eig.eigenvalues();  // ascending
    const double scale = std::max(ev[2], 0.0);
    if (!(scale > 0.0) || ev[1] <= 1e-12 * scale) {
      out.normal_flags[i] = 1;
      continue;
    }
    Vec3 n = eig.eigenvectors().col(0).normalized();
    if (n.dot(-pc.points[i]) < 0.0) n = -n;
    out.normals[i] = n;
  }
  return out;
}

}  // namespace ditto::geometry
