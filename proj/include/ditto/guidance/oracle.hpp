// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "ditto/geometry/primitives.hpp"
#include "ditto/guidance/interface.hpp"
#include "ditto/prerender/rasterize.hpp"

namespace ditto::guidance {

/// Sphere colored orange on the half facing +Y (the frontal camera) and blue on the far half.
inline geometry::ScaffoldMesh two_tone_sphere(double radius = 0.75, int subdivisions = 4) {
  return geometry::make_icosphere(radius, subdivisions, geometry::Vec3::Zero(), [](const geometry::Vec3& d) {
    return d.y() >= 0.0 ? geometry::Vec3(0.95, 0.55, 0.15) : geometry::Vec3(0.15, 0.35, 0.85);
  });
}

/// Deterministic stand-in for the diffusion, depth and codec models, built
/// around a known target scene. Residuals pull a latent toward the target's
/// stub-encoded render at the request pose, inside the regenerate mask only.
class SyntheticOracle final : public Guidance {
 public:
  explicit SyntheticOracle(geometry::ScaffoldMesh target = two_tone_sphere(),
                           geometry::CameraIntrinsics K = geometry::default_intrinsics(), int intrinsics_side = 512,
                           prerender::CameraPose frontal = {})
      : target_(std::move(target)), K_(K), k_side_(intrinsics_side), frontal_(frontal) {}

  std::string mode() const override { return "oracle"; }
  bool metric_depth() const override { return true; }
  std::vector<std::string> health() override { return {"synthetic-oracle", "stub-pool8"}; }

  const geometry::ScaffoldMesh& target() const { return target_; }
  const prerender::CameraPose& frontal_pose() const { return frontal_; }

  prerender::RasterImage render_target(const prerender::CameraPose& pose, int side) const {
    return prerender::rasterize(target_, pose, K_.scaled(k_side_, side), side);
  }

  /// Stub-encoded target latent at side L.
  Tensor target_latent(const prerender::CameraPose& pose, int latent_side) const {
    const auto r = render_target(pose, latent_side * prerender::kLatentFactor);
    return codec_.encode(r.rgb, r.mask);
  }

  GuidanceResponse call(const GuidanceRequest& req) override {
    const auto start = std::chrono::steady_clock::now();
    req.validate();
    GuidanceResponse res{req.kind, {}, "synthetic-oracle", 0.0};
    switch (req.kind) {
      case RequestKind::kResidual: {
        require(req.pose.has_value(), ErrorKind::kInvalidArgument, "the synthetic oracle needs the request pose");
        const Tensor target = target_latent(*req.pose, req.payload.height());
        res.payload = Tensor(req.payload.channels(), req.payload.height(), req.payload.width());
        for (int c = 0; c < res.payload.channels(); ++c)
          for (int y = 0; y < res.payload.height(); ++y)
            for (int x = 0; x < res.payload.width(); ++x)
              res.payload(c, y, x) = (req.payload(c, y, x) - target(c, y, x)) * req.mask(0, y, x);
        break;
      }
      case RequestKind::kGenerate:
        res.payload = render_target(frontal_, req.size).rgb;
        break;
      case RequestKind::kDepth: {
        require(req.payload.height() == req.payload.width(), ErrorKind::kShapeMismatch,
                "oracle depth needs a square image");
        // Uncovered pixels carry depth 0 (invalid) so the payload stays finite.
        res.payload = render_target(frontal_, req.payload.height()).depth;
        for (double& d : res.payload.data())
          if (!std::isfinite(d)) d = 0.0;
        break;
      }
      case RequestKind::kEncode: {
        Tensor coverage(1, req.payload.height(), req.payload.width());
        for (int y = 0; y < coverage.height(); ++y)
          for (int x = 0; x < coverage.width(); ++x) {
            bool white = true;
            for (int c = 0; c < 3; ++c) white = white && req.payload(c, y, x) >= 1.0;
            coverage(0, y, x) = white ? 0.0 : 1.0;
          }
        res.payload = codec_.encode(req.payload, coverage);
        break;
      }
      case RequestKind::kDecode:
        res.payload = codec_.decode(req.payload);
        break;
    }
    validate_response(req, res);
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return res;
  }

 private:
  geometry::ScaffoldMesh target_;
  geometry::CameraIntrinsics K_;
  int k_side_;
  prerender::CameraPose frontal_;
  prerender::StubCodec codec_;
};

}  // namespace ditto::guidance
