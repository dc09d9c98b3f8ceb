// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ditto/core/io.hpp"
#include "ditto/prerender/codec.hpp"
#include "ditto/prerender/pose.hpp"
#include "ditto/prerender/rasterize.hpp"

namespace ditto::prerender {

/// Latent supervision of one view at one latent side.
struct LatentLevel {
  Tensor z;     // 4 x L x L
  Tensor mask;  // 1 x L x L, binary foreground
};

struct PrerenderedView {
  CameraPose pose;
  Tensor rgb;
  Tensor depth;
  Tensor mask;
  std::map<int, LatentLevel> levels;  // keyed by latent side

  const LatentLevel& level(int side) const {
    auto it = levels.find(side);
    if (it == levels.end()) fail(ErrorKind::kInvalidArgument, "view has no latent at side " + std::to_string(side));
    return it->second;
  }

  /// Latent and mask at an arbitrary side: exact when cached, otherwise resized
  /// from the nearest larger cached level (mask re-binarized).
  LatentLevel level_resized(int side) const {
    if (auto it = levels.find(side); it != levels.end()) return it->second;
    require(!levels.empty(), ErrorKind::kInvalidArgument, "view has no latents");
    auto it = levels.lower_bound(side);
    if (it == levels.end()) it = std::prev(levels.end());
    LatentLevel out{resize_bilinear(it->second.z, side, side), resize_bilinear(it->second.mask, side, side)};
    for (double& v : out.mask.data()) v = v >= 0.5 ? 1.0 : 0.0;
    return out;
  }
};

struct ViewBank {
  std::vector<PrerenderedView> views;
  AngleBox ib_bounds;
};

/// n poses drawn uniformly over the bounds rectangle (deterministic in seed).
inline std::vector<CameraPose> sample_ib_poses(int n, const AngleBox& bounds, std::uint64_t seed,
                                               double radius = 3.0) {
  require(n >= 1, ErrorKind::kInvalidArgument, "need at least one pose");
  require(bounds.theta_max >= bounds.theta_min && bounds.phi_max >= bounds.phi_min, ErrorKind::kInvalidArgument,
          "inverted angle bounds");
  std::mt19937_64 rng(seed);
  std::vector<CameraPose> poses;
  poses.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double ut = std::generate_canonical<double, 53>(rng);
    const double up = std::generate_canonical<double, 53>(rng);
    CameraPose p;
    p.theta = bounds.theta_min + ut * (bounds.theta_max - bounds.theta_min);
    p.phi = bounds.phi_min + up * (bounds.phi_max - bounds.phi_min);
    p.radius = radius;
    poses.push_back(p);
  }
  return poses;
}

/// Index of the view whose direction is closest in great-circle angle; ties
/// (within 1e-9 degrees, absorbing trigonometric rounding) go to the lowest index.
inline std::size_t find_closest_index(const ViewBank& bank, double theta, double phi) {
  require(!bank.views.empty(), ErrorKind::kEmptyInput, "find_closest on an empty view bank");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bank.views.size(); ++i) {
    const double d = great_circle_degrees(theta, phi, bank.views[i].pose.theta, bank.views[i].pose.phi);
    if (d < best_d - 1e-9) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline const PrerenderedView& find_closest(const ViewBank& bank, double theta, double phi) {
  return bank.views[find_closest_index(bank, theta, phi)];
}

struct PrerenderOptions {
  int image_side = 512;                 // stored rgb / depth / mask resolution
  std::vector<int> latent_sides = {64, 128};
  geometry::CameraIntrinsics intrinsics = geometry::default_intrinsics();  // at base_side
  int base_side = 512;
};

/// Rasterizes the scaffold at every pose and encodes each requested latent side
/// from its own raster at kLatentFactor x that side.
inline PrerenderedView prerender_view(const geometry::ScaffoldMesh& mesh, const CameraPose& pose,
                                      const LatentCodec& codec, const PrerenderOptions& opt) {
  PrerenderedView view;
  view.pose = pose.normalized();
  auto base = rasterize(mesh, view.pose, opt.intrinsics.scaled(opt.base_side, opt.image_side), opt.image_side);
  for (int side : opt.latent_sides) {
    const int img = side * kLatentFactor;
    const RasterImage r =
        img == opt.image_side ? base : rasterize(mesh, view.pose, opt.intrinsics.scaled(opt.base_side, img), img);
    view.levels[side] = LatentLevel{encode_view(r.rgb, r.mask, codec, side), latent_mask(r.mask, side)};
  }
  view.rgb = std::move(base.rgb);
  view.depth = std::move(base.depth);
  view.mask = std::move(base.mask);
  return view;
}

inline ViewBank build_view_bank(const geometry::ScaffoldMesh& mesh, const std::vector<CameraPose>& poses,
                                const AngleBox& ib_bounds, const LatentCodec& codec, const PrerenderOptions& opt) {
  ViewBank bank;
  bank.ib_bounds = ib_bounds;
  for (const auto& p : poses) {
    require(ib_bounds.contains(p.theta, p.phi), ErrorKind::kInvalidArgument, "pose outside the in-boundary box");
    bank.views.push_back(prerender_view(mesh, p, codec, opt));
  }
  return bank;
}

inline nlohmann::json pose_to_json(const CameraPose& p) {
  return {{"theta", p.theta}, {"phi", p.phi}, {"radius", p.radius}, {"look_at", {p.look_at.x(), p.look_at.y(), p.look_at.z()}}};
}

inline CameraPose pose_from_json(const nlohmann::json& j) {
  CameraPose p;
  p.theta = j.at("theta").get<double>();
  p.phi = j.at("phi").get<double>();
  p.radius = j.at("radius").get<double>();
  const auto& la = j.at("look_at");
  p.look_at = Vec3(la.at(0).get<double>(), la.at(1).get<double>(), la.at(2).get<double>());
  return p;
}

/// Directory layout: manifest.json plus view_NNN/{rgb.png, depth.f32, mask.png, z_<L>.f32}.
inline void save_view_bank(const std::filesystem::path& dir, const ViewBank& bank) {
  nlohmann::json manifest;
  manifest["ib_bounds"] = {{"theta_min", bank.ib_bounds.theta_min}, {"theta_max", bank.ib_bounds.theta_max},
                           {"phi_min", bank.ib_bounds.phi_min},     {"phi_max", bank.ib_bounds.phi_max}};
  manifest["views"] = nlohmann::json::array();
  for (std::size_t i = 0; i < bank.views.size(); ++i) {
    const auto& v = bank.views[i];
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03zu", i);
    const auto vdir = dir / name;
    io::write_png(vdir / "rgb.png", v.rgb);
    io::write_tensor(vdir / "depth.f32", v.depth);
    io::write_png(vdir / "mask.png", v.mask);
    nlohmann::json entry = pose_to_json(v.pose);
    entry["dir"] = name;
    entry["latent_sides"] = nlohmann::json::array();
    for (const auto& [side, level] : v.levels) {
      io::write_tensor(vdir / ("z_" + std::to_string(side) + ".f32"), level.z);
      entry["latent_sides"].push_back(side);
    }
    manifest["views"].push_back(entry);
  }
  io::write_file(dir / "manifest.json", manifest.dump(2));
}

inline ViewBank load_view_bank(const std::filesystem::path& dir) {
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  ViewBank bank;
  const auto& b = manifest.at("ib_bounds");
  bank.ib_bounds = {b.at("theta_min"), b.at("theta_max"), b.at("phi_min"), b.at("phi_max")};
  for (const auto& entry : manifest.at("views")) {
    PrerenderedView v;
    v.pose = pose_from_json(entry);
    const auto vdir = dir / entry.at("dir").get<std::string>();
    v.rgb = io::read_png(vdir / "rgb.png");
    v.depth = io::read_tensor(vdir / "depth.f32");
    Tensor mask3 = io::read_png(vdir / "mask.png");
    v.mask = Tensor(1, mask3.height(), mask3.width());
    std::copy(mask3.channel(0).begin(), mask3.channel(0).end(), v.mask.data().begin());
    for (const auto& side_j : entry.at("latent_sides")) {
      const int side = side_j.get<int>();
      Tensor z = io::read_tensor(vdir / ("z_" + std::to_string(side) + ".f32"));
      // Latent masks come from the stored mask when it divides evenly, else from the latent itself.
      Tensor m = v.mask.height() % side == 0 ? latent_mask(v.mask, side) : Tensor(1, side, side);
      if (v.mask.height() % side != 0)
        for (int y = 0; y < side; ++y)
          for (int x = 0; x < side; ++x) m(0, y, x) = z(3, y, x) >= 0.0 ? 1.0 : 0.0;
      v.levels[side] = LatentLevel{std::move(z), std::move(m)};
    }
    bank.views.push_back(std::move(v));
  }
  return bank;
}

}  // namespace ditto::prerender
