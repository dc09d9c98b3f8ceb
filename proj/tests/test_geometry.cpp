// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "ditto/geometry/camera.hpp"
#include "ditto/geometry/cleaning.hpp"
#include "ditto/geometry/kdtree.hpp"
#include "ditto/geometry/ply.hpp"
#include "ditto/geometry/poisson.hpp"
#include "ditto/geometry/primitives.hpp"
#include "ditto/geometry/topology.hpp"

using namespace ditto;
using namespace ditto::geometry;

namespace {

RgbdImage random_rgbd(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> depth(0.5, 4.0), col(0.0, 1.0), coin(0.0, 1.0);
  RgbdImage img{Tensor(3, h, w), Tensor(1, h, w)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) img.rgb(c, y, x) = col(rng);
      img.depth(0, y, x) = coin(rng) < 0.2 ? 0.0 : depth(rng);
    }
  return img;
}

PointCloud uniform_sphere_cloud(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  PointCloud pc;
  for (int i = 0; i < n; ++i) {
    pc.points.push_back(Vec3(g(rng), g(rng), g(rng)).normalized());
    pc.colors.push_back(Vec3::Constant(0.3));
  }
  return pc;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(q * (v.size() - 1))];
}

}  // namespace

TEST(Unproject, PrincipalPointLiesOnOpticalAxis) {
  RgbdImage img{Tensor(3, 512, 512, 0.5), Tensor(1, 512, 512, 0.0)};
  img.depth(0, 256, 256) = 2.0;
  const auto pc = unproject(img, default_intrinsics(), 1.5);
  ASSERT_EQ(pc.size(), 1u);
  EXPECT_NEAR(pc.points[0].x(), 0.0, 1e-12);
  EXPECT_NEAR(pc.points[0].y(), 0.0, 1e-12);
  EXPECT_NEAR(pc.points[0].z(), 3.0, 1e-12);
}

TEST(Unproject, OneFocalLengthOffsetAtUnitDepth) {
  CameraIntrinsics K{64.0, 64.0, 256.0, 256.0, 0.0};
  RgbdImage img{Tensor(3, 512, 512, 0.5), Tensor(1, 512, 512, 0.0)};
  img.depth(0, 256, 256 + 64) = 1.0;
  const auto pc = unproject(img, K, 1.0);
  ASSERT_EQ(pc.size(), 1u);
  EXPECT_NEAR(pc.points[0].x(), 1.0, 1e-12);
  EXPECT_NEAR(pc.points[0].y(), 0.0, 1e-12);
  EXPECT_NEAR(pc.points[0].z(), 1.0, 1e-12);
}

TEST(Unproject, DefaultFocalLengthIs45mmEquivalent) {
  const auto K = default_intrinsics();
  EXPECT_DOUBLE_EQ(K.fx, 640.0);
  EXPECT_DOUBLE_EQ(K.fy, 640.0);
  EXPECT_DOUBLE_EQ(K.cx, 256.0);
  EXPECT_DOUBLE_EQ(K.cy, 256.0);
}

TEST(Unproject, ProjectRoundTripRecoversPixelCenters) {
  const auto img = random_rgbd(64, 48, 3);
  CameraIntrinsics K{55.0, 57.0, 31.5, 23.0, 0.0};
  const auto pc = unproject(img, K, 0.7);
  std::size_t n = 0;
  for (int v = 0; v < img.height(); ++v)
    for (int u = 0; u < img.width(); ++u) {
      if (!img.valid(v, u)) continue;
      const auto px = project(pc.points[n], K);
      ASSERT_TRUE(px.has_value());
      EXPECT_NEAR(px->u, u, 1e-6);
      EXPECT_NEAR(px->v, v, 1e-6);
      EXPECT_DOUBLE_EQ(pc.colors[n].x(), img.rgb(0, v, u));
      ++n;
    }
  EXPECT_EQ(n, pc.size());
}

TEST(Unproject, NoValidDepthIsEmptyInput) {
  RgbdImage img{Tensor(3, 8, 8, 0.5), Tensor(1, 8, 8, 0.0)};
  try {
    unproject(img, CameraIntrinsics{10, 10, 4, 4, 0}, 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyInput);
  }
}

TEST(Unproject, RejectsSkewAndBadPrincipalPoint) {
  RgbdImage img{Tensor(3, 8, 8, 0.5), Tensor(1, 8, 8, 1.0)};
  EXPECT_THROW(unproject(img, CameraIntrinsics{10, 10, 4, 4, 0.1}, 1.0), Error);
  EXPECT_THROW(unproject(img, CameraIntrinsics{10, 10, 9, 4, 0}, 1.0), Error);
  EXPECT_THROW(unproject(img, CameraIntrinsics{-1, 10, 4, 4, 0}, 1.0), Error);
}

TEST(Unproject, DiagonalNormalizationGivesUnitDiagonal) {
  const auto img = random_rgbd(32, 32, 9);
  CameraIntrinsics K{40, 40, 16, 16, 0};
  const double s = depth_scale_for_diagonal(img, K);
  const auto pc = unproject(img, K, s);
  Vec3 lo = pc.points[0], hi = lo;
  for (const auto& p : pc.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  EXPECT_NEAR((hi - lo).norm(), 1.0, 1e-12);
}

TEST(KdTree, MatchesBruteForce) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> pts(500);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  pts[17] = pts[3];  // an exact duplicate exercises tie-breaking
  KdTree tree(pts);
  for (int q = 0; q < 50; ++q) {
    const Vec3 c(u(rng), u(rng), u(rng));
    std::vector<Neighbor> all;
    for (int i = 0; i < 500; ++i) all.push_back({i, (pts[i] - c).squaredNorm()});
    std::sort(all.begin(), all.end());
    const auto got = tree.knn(c, 7);
    ASSERT_EQ(got.size(), 7u);
    for (int i = 0; i < 7; ++i) EXPECT_EQ(got[i].index, all[i].index);
  }
}

TEST(RemoveOutliers, PlantedFarPointsRemoved) {
  PointCloud pc = uniform_sphere_cloud(1000, 11);
  std::mt19937 rng(12);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10; ++i) {
    pc.points.push_back(10.0 * Vec3(g(rng), g(rng), g(rng)).normalized());
    pc.colors.push_back(Vec3::Constant(1.0));
  }
  // Oracle: brute-force mean 5-NN distance and the mean + 1 std threshold.
  std::vector<double> stat(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < pc.size(); ++j)
      if (j != i) d.push_back((pc.points[i] - pc.points[j]).norm());
    std::partial_sort(d.begin(), d.begin() + 5, d.end());
    stat[i] = (d[0] + d[1] + d[2] + d[3] + d[4]) / 5.0;
  }
  double mean = 0, var = 0;
  for (double s : stat) mean += s;
  mean /= stat.size();
  for (double s : stat) var += (s - mean) * (s - mean);
  const double thr = mean + std::sqrt(var / stat.size());
  std::size_t expected_kept = std::count_if(stat.begin(), stat.end(), [&](double s) { return s <= thr; });

  const auto out = remove_outliers(pc, 5, 1.0);
  EXPECT_EQ(out.size(), expected_kept);
  std::size_t sphere_kept = 0;
  for (const auto& p : out.points) {
    EXPECT_LT(p.norm(), 2.0);
    if (p.norm() < 1.0 + 1e-9) ++sphere_kept;
  }
  EXPECT_GE(sphere_kept, 990u);
  // Order and colors are preserved.
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_EQ(out.colors[i], Vec3::Constant(0.3));
}

TEST(RemoveOutliers, ZeroVarianceRemovesNothing) {
  PointCloud pc;
  for (int i = 0; i < 50; ++i) {
    pc.points.push_back(Vec3(0.25, -1.0, 3.0));
    pc.colors.push_back(Vec3::Zero());
  }
  EXPECT_EQ(remove_outliers(pc, 5, 1.0).size(), 50u);
}

TEST(RemoveOutliers, EpsilonJitterRemovesNothing) {
  PointCloud pc;
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> eps(-1e-13, 1e-13);
  for (int i = 0; i < 50; ++i) pc.points.push_back(Vec3(0.25 + eps(rng), -1.0 + eps(rng), 3.0 + eps(rng)));
  pc.points.push_back(Vec3(0.25, -1.0, 3.0));
  EXPECT_EQ(remove_outliers(pc, 5, 1.0).size(), pc.size());
}

TEST(RemoveOutliers, IdempotentOnUniformSpacing) {
  // Evenly spaced ring: every point has the same statistic, so a second pass
  // over the first pass's output is a no-op.
  PointCloud pc;
  for (int i = 0; i < 200; ++i) {
    const double a = 2 * std::numbers::pi * i / 200;
    pc.points.push_back(Vec3(std::cos(a), std::sin(a), 2.0));
  }
  const auto once = remove_outliers(pc);
  const auto twice = remove_outliers(once);
  EXPECT_EQ(once.points, twice.points);
}

TEST(RemoveOutliers, SecondPassOnlyShrinks) {
  const auto pc = uniform_sphere_cloud(400, 21);
  const auto once = remove_outliers(pc);
  const auto twice = remove_outliers(once);
  EXPECT_LE(twice.size(), once.size());
  for (const auto& p : twice.points) EXPECT_NE(std::find(once.points.begin(), once.points.end(), p), once.points.end());
}

TEST(RemoveOutliers, TooFewPoints) {
  PointCloud pc;
  for (int i = 0; i < 5; ++i) pc.points.push_back(Vec3(i, 0, 0));
  EXPECT_THROW(remove_outliers(pc, 5, 1.0), Error);
}

TEST(EstimateNormals, PlaneFacesCamera) {
  PointCloud pc;
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 400; ++i) pc.points.push_back(Vec3(u(rng), u(rng), 5.0));
  const auto out = estimate_normals(pc, 10);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out.normal_flags[i], 0);
    EXPECT_NEAR((out.normals[i] - Vec3(0, 0, -1)).norm(), 0.0, 1e-3);
  }
}

TEST(EstimateNormals, SphereWithinTwoDegreesOfRadial) {
  PointCloud pc = sample_sphere(4000, 1.0, Vec3(0, 0, 3));
  pc.normals.clear();
  const auto out = estimate_normals(pc, 12);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec3 radial = (out.points[i] - Vec3(0, 0, 3)).normalized();
    const double c = std::min(1.0, std::abs(out.normals[i].dot(radial)));
    EXPECT_LT(std::acos(c) * 180.0 / std::numbers::pi, 2.0);
    EXPECT_GE(out.normals[i].dot(-out.points[i]), 0.0);
    EXPECT_NEAR(out.normals[i].norm(), 1.0, 1e-6);
  }
}

TEST(EstimateNormals, CollinearNeighbourhoodIsFlagged) {
  PointCloud pc;
  for (int i = 0; i < 30; ++i) pc.points.push_back(Vec3(0.1 * i, 0, 2));
  const auto out = estimate_normals(pc, 5);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out.normal_flags[i], 1);
    EXPECT_EQ(out.normals[i], Vec3(0, 0, -1));
  }
}

TEST(Poisson, SphereReconstructionIsAccurateAndWatertight) {
  const auto pc = sample_sphere(20000);
  const auto mesh = poisson_reconstruct(pc, PoissonOptions{.grid_depth = 7});
  ASSERT_TRUE(mesh.valid());
  std::vector<double> err;
  for (const auto& v : mesh.vertices) err.push_back(std::abs(v.norm() - 1.0));
  EXPECT_LT(percentile(err, 0.95), 0.05);
  EXPECT_TRUE(is_watertight(mesh));
  EXPECT_EQ(euler_characteristic(mesh), 2);
  // Faces wind outward.
  double signed_volume = 0;
  for (const auto& f : mesh.faces)
    signed_volume += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]])) / 6.0;
  EXPECT_NEAR(signed_volume, 4.0 / 3.0 * std::numbers::pi, 0.2);
}

TEST(Poisson, CubeSurfaceArea) {
  const auto pc = sample_cube(20000);
  const auto mesh = poisson_reconstruct(pc, PoissonOptions{.grid_depth = 7});
  EXPECT_NEAR(surface_area(mesh), 6.0, 0.15 * 6.0);
}

TEST(Poisson, Deterministic) {
  const auto pc = sample_sphere(3000);
  const auto a = poisson_reconstruct(pc, PoissonOptions{.grid_depth = 5});
  const auto b = poisson_reconstruct(pc, PoissonOptions{.grid_depth = 5});
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_EQ(a.faces, b.faces);
  EXPECT_EQ(a.vertex_density, b.vertex_density);
}

TEST(Poisson, NonConvergenceReportsResidual) {
  const auto pc = sample_sphere(2000);
  try {
    poisson_reconstruct(pc, PoissonOptions{.grid_depth = 6, .coarsest_depth = 6, .max_iterations = 2});
    FAIL() << "expected non-convergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotConverged);
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(Poisson, RequiresNormalsAndEnoughPoints) {
  PointCloud few = sample_sphere(50);
  EXPECT_THROW(poisson_reconstruct(few), Error);
  PointCloud no_normals = sample_sphere(500);
  no_normals.normals.clear();
  EXPECT_THROW(poisson_reconstruct(no_normals), Error);
}

TEST(TrimLowDensity, ZeroQuantileKeepsEverything) {
  const auto mesh = poisson_reconstruct(sample_sphere(3000), PoissonOptions{.grid_depth = 5});
  const auto out = trim_low_density(mesh, 0.0);
  EXPECT_EQ(out.vertices, mesh.vertices);
  EXPECT_EQ(out.faces, mesh.faces);
}

TEST(TrimLowDensity, RemovesSpuriousFarField) {
  PointCloud pc = sample_sphere(20000);
  std::mt19937 rng(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) {
    const Vec3 d = Vec3(g(rng), g(rng), g(rng)).normalized();
    pc.points.push_back(3.0 * d);
    pc.normals.push_back(d);
    pc.colors.push_back(Vec3::Constant(1.0));
  }
  const auto mesh = poisson_reconstruct(pc, PoissonOptions{.grid_depth = 7});
  const auto out = trim_low_density(mesh, 0.1);
  ASSERT_TRUE(out.valid());
  EXPECT_LE(out.vertices.size(), mesh.vertices.size());
  for (const auto& v : out.vertices) EXPECT_LE(v.norm(), 1.5);
}

TEST(TrimLowDensity, CompactsIndices) {
  ScaffoldMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  m.vertex_colors.assign(4, Vec3::Zero());
  m.vertex_density = {0.0, 5.0, 5.0, 5.0};
  m.faces = {{0, 1, 2}, {1, 3, 2}};
  const auto out = trim_low_density(m, 0.1);
  ASSERT_EQ(out.vertices.size(), 3u);
  ASSERT_EQ(out.faces.size(), 1u);
  EXPECT_EQ(out.faces[0], (std::array<int, 3>{0, 2, 1}));
  EXPECT_TRUE(out.valid());
  EXPECT_THROW(trim_low_density(m, 1.5), Error);
  EXPECT_THROW(trim_low_density(m, -0.1), Error);
}

TEST(Ply, MeshRoundTrip) {
  const auto mesh = make_icosphere(1.0, 1);
  const auto path = std::filesystem::temp_directory_path() / "ditto_test_mesh.ply";
  write_ply(path, mesh);
  const auto back = read_ply_mesh(path);
  ASSERT_EQ(back.vertices.size(), mesh.vertices.size());
  EXPECT_EQ(back.faces, mesh.faces);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) EXPECT_NEAR((back.vertices[i] - mesh.vertices[i]).norm(), 0, 1e-6);
  EXPECT_TRUE(is_watertight(back));
}
