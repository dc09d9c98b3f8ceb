// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "ditto/geometry/primitives.hpp"
#include "ditto/prerender/view_bank.hpp"

namespace {

using namespace ditto;
using namespace ditto::prerender;

geometry::ScaffoldMesh unit_sphere() {
  return geometry::make_icosphere(1.0, 5, Vec3::Zero(), [](const Vec3& d) {
    return Vec3(0.5 + 0.5 * d.x(), 0.5 + 0.5 * d.y(), 0.5 + 0.5 * d.z());
  });
}

TEST(Rasterize, SphereSilhouetteArea) {
  const auto mesh = unit_sphere();
  const auto r = rasterize(mesh, CameraPose{}, geometry::default_intrinsics(), 512);
  double covered = 0;
  for (double m : r.mask.data()) covered += m;
  // Tangent cone of a unit sphere seen from distance 3 projects to a disc of radius f / sqrt(8).
  const double radius = 640.0 / std::sqrt(8.0);
  const double analytic = std::numbers::pi * radius * radius;
  EXPECT_NEAR(covered / analytic, 1.0, 0.03);
}

TEST(Rasterize, CenterDepth) {
  const auto r = rasterize(unit_sphere(), CameraPose{}, geometry::default_intrinsics(), 512);
  EXPECT_NEAR(r.depth(0, 256, 256), 2.0, 0.02);
  EXPECT_EQ(r.mask(0, 256, 256), 1.0);
}

TEST(Rasterize, MaskMatchesFiniteDepth) {
  const auto r = rasterize(unit_sphere(), CameraPose{75.0, 20.0, 3.0}, geometry::default_intrinsics(), 256);
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x) {
      EXPECT_EQ(r.mask(0, y, x) == 1.0, std::isfinite(r.depth(0, y, x)));
      if (r.mask(0, y, x) == 0.0) {
        for (int c = 0; c < 3; ++c) EXPECT_EQ(r.rgb(c, y, x), 1.0);
      }
    }
}

TEST(Rasterize, EmptyViewIsWhite) {
  // Sphere placed behind the camera.
  const auto mesh = geometry::make_icosphere(0.5, 2, Vec3(0, 6, 0));
  const auto r = rasterize(mesh, CameraPose{}, geometry::default_intrinsics(), 128);
  for (double m : r.mask.data()) EXPECT_EQ(m, 0.0);
  for (double v : r.rgb.data()) EXPECT_EQ(v, 1.0);
}

TEST(Rasterize, Deterministic) {
  const auto mesh = unit_sphere();
  const CameraPose pose{100.0, -10.0, 3.0};
  const auto a = rasterize(mesh, pose, geometry::default_intrinsics(), 256);
  const auto b = rasterize(mesh, pose, geometry::default_intrinsics(), 256);
  EXPECT_EQ(a.rgb, b.rgb);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_EQ(a.mask, b.mask);
}

TEST(StubCodec, WhiteImage) {
  StubCodec codec;
  const Tensor white(3, 64, 64, 1.0);
  const Tensor empty_mask(1, 64, 64, 0.0);
  const Tensor z = codec.encode(white, empty_mask);
  ASSERT_EQ(z.channels(), 4);
  ASSERT_EQ(z.height(), 8);
  for (int c = 0; c < 3; ++c)
    for (double v : z.channel(c)) EXPECT_EQ(v, 1.0);
  for (double v : z.channel(3)) EXPECT_EQ(v, -1.0);
  EXPECT_EQ(z, white_latent(8));
}

TEST(StubCodec, DecodeEncodeIsBlockAverage) {
  StubCodec codec;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor img(3, 32, 32);
  for (double& v : img.data()) v = u(rng);
  const Tensor round = codec.decode(codec.encode(img, {}));
  ASSERT_TRUE(round.same_shape(img));
  for (int c = 0; c < 3; ++c)
    for (int by = 0; by < 4; ++by)
      for (int bx = 0; bx < 4; ++bx) {
        double mean = 0;
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) mean += img(c, by * 8 + y, bx * 8 + x);
        mean /= 64.0;
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) EXPECT_NEAR(round(c, by * 8 + y, bx * 8 + x), mean, 1e-12);
      }
}

TEST(StubCodec, AffineInScale) {
  StubCodec codec;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor img(3, 16, 16);
  for (double& v : img.data()) v = u(rng);
  const Tensor base = codec.encode(img, {});
  for (double a : {0.25, 0.8}) {
    Tensor scaled = img;
    for (double& v : scaled.data()) v *= a;
    const Tensor z = codec.encode(scaled, {});
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) EXPECT_NEAR(z(c, y, x) + 1.0, a * (base(c, y, x) + 1.0), 1e-12);
  }
}

TEST(StubCodec, MaskChannel) {
  StubCodec codec;
  Tensor img(3, 16, 16, 0.5);
  Tensor mask(1, 16, 16, 0.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 4; ++x) mask(0, y, x) = 1.0;
  const Tensor z = codec.encode(img, mask);
  EXPECT_DOUBLE_EQ(z(3, 0, 0), 0.0);  // half covered
  EXPECT_DOUBLE_EQ(z(3, 1, 1), -1.0);
  const Tensor lm = latent_mask(mask, 2);
  EXPECT_EQ(lm(0, 0, 0), 1.0);
  EXPECT_EQ(lm(0, 0, 1), 0.0);
}

TEST(SampleIbPoses, InsideBox) {
  const AngleBox box;
  const auto poses = sample_ib_poses(64, box, 11);
  ASSERT_EQ(poses.size(), 64u);
  for (const auto& p : poses) {
    EXPECT_TRUE(box.contains(p.theta, p.phi));
    EXPECT_EQ(p.radius, 3.0);
  }
  EXPECT_EQ(poses, sample_ib_poses(64, box, 11));
  EXPECT_NE(poses, sample_ib_poses(64, box, 12));
}

TEST(SampleIbPoses, DegenerateBox) {
  const auto poses = sample_ib_poses(1, AngleBox{90, 90, 0, 0}, 5);
  ASSERT_EQ(poses.size(), 1u);
  EXPECT_EQ(poses[0].theta, 90.0);
  EXPECT_EQ(poses[0].phi, 0.0);
}

TEST(SampleIbPoses, ChiSquareUniform) {
  const AngleBox box;
  const int n = 10000, bins = 6;
  const auto poses = sample_ib_poses(n, box, 2024);
  std::vector<int> counts(bins * bins, 0);
  for (const auto& p : poses) {
    const int i = std::min(bins - 1, static_cast<int>((p.theta - box.theta_min) / (box.theta_max - box.theta_min) * bins));
    const int j = std::min(bins - 1, static_cast<int>((p.phi - box.phi_min) / (box.phi_max - box.phi_min) * bins));
    ++counts[i * bins + j];
  }
  const double expected = static_cast<double>(n) / (bins * bins);
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 1% point of chi-square with 35 degrees of freedom.
  EXPECT_LT(chi2, 57.342);
}

TEST(SampleIbPoses, RejectsBadInput) {
  EXPECT_THROW(sample_ib_poses(0, AngleBox{}, 1), Error);
  EXPECT_THROW(sample_ib_poses(1, AngleBox{120, 60, 0, 0}, 1), Error);
}

ViewBank bank_of(std::initializer_list<std::pair<double, double>> angles) {
  ViewBank bank;
  for (auto [t, p] : angles) {
    PrerenderedView v;
    v.pose = CameraPose{t, p};
    bank.views.push_back(v);
  }
  return bank;
}

TEST(FindClosest, TwoViews) {
  const auto bank = bank_of({{60, 0}, {120, 0}});
  EXPECT_EQ(find_closest_index(bank, 89, 0), 0u);
  EXPECT_EQ(find_closest(bank, 91, 0).pose.theta, 120.0);
  EXPECT_EQ(find_closest_index(bank, 90, 0), 0u);  // tie -> lowest index
}

TEST(FindClosest, ExactPoseAndBruteForce) {
  ViewBank bank;
  for (const auto& p : sample_ib_poses(64, AngleBox{}, 9)) {
    PrerenderedView v;
    v.pose = p;
    bank.views.push_back(v);
  }
  for (std::size_t i = 0; i < bank.views.size(); ++i)
    EXPECT_EQ(find_closest_index(bank, bank.views[i].pose.theta, bank.views[i].pose.phi), i);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ut(0, 360), up(-90, 90);
  for (int q = 0; q < 200; ++q) {
    const double t = ut(rng), p = up(rng);
    const auto& best = find_closest(bank, t, p);
    const double d = great_circle_degrees(t, p, best.pose.theta, best.pose.phi);
    for (const auto& v : bank.views) EXPECT_LE(d, great_circle_degrees(t, p, v.pose.theta, v.pose.phi));
  }
}

TEST(FindClosest, EmptyBank) { EXPECT_THROW(find_closest(ViewBank{}, 0, 0), Error); }

TEST(GreatCircle, KnownAngles) {
  EXPECT_NEAR(great_circle_degrees(60, 0, 120, 0), 60.0, 1e-9);
  EXPECT_NEAR(great_circle_degrees(0, 0, 180, 0), 180.0, 1e-9);
  EXPECT_NEAR(great_circle_degrees(10, 90, 250, 90), 0.0, 1e-6);
  EXPECT_NEAR(great_circle_degrees(359, 0, 1, 0), 2.0, 1e-9);
}

TEST(ViewBank, BuildSaveLoad) {
  StubCodec codec;
  PrerenderOptions opt;
  opt.image_side = 128;
  opt.latent_sides = {16, 32};
  const auto poses = sample_ib_poses(3, AngleBox{}, 1);
  const auto bank = build_view_bank(unit_sphere(), poses, AngleBox{}, codec, opt);
  ASSERT_EQ(bank.views.size(), 3u);
  const auto& v = bank.views[0];
  EXPECT_EQ(v.level(16).z.height(), 16);
  EXPECT_EQ(v.level(32).z.height(), 32);
  EXPECT_TRUE(v.level(16).z.all_finite());
  EXPECT_THROW(v.level(64), Error);

  const auto dir = std::filesystem::temp_directory_path() / "ditto_test_bank";
  std::filesystem::remove_all(dir);
  save_view_bank(dir, bank);
  const auto loaded = load_view_bank(dir);
  ASSERT_EQ(loaded.views.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(loaded.views[i].pose, bank.views[i].pose);
    EXPECT_EQ(loaded.views[i].mask, bank.views[i].mask);
    EXPECT_LT(mean_abs_diff(loaded.views[i].rgb, bank.views[i].rgb), 1.0 / 255);
    for (int side : {16, 32}) {
      EXPECT_LT(mean_abs_diff(loaded.views[i].level(side).z, bank.views[i].level(side).z), 1e-6);
      EXPECT_EQ(loaded.views[i].level(side).mask, bank.views[i].level(side).mask);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(ViewBank, RejectsPoseOutsideBox) {
  StubCodec codec;
  PrerenderOptions opt;
  opt.image_side = 64;
  opt.latent_sides = {8};
  EXPECT_THROW(build_view_bank(unit_sphere(), {CameraPose{150, 0}}, AngleBox{}, codec, opt), Error);
}

}  // namespace
