// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ditto/core/io.hpp"
#include "ditto/geometry/types.hpp"

namespace ditto::latentfield {

using geometry::Vec3;

inline constexpr int kFeatureChannels = 4;

inline double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Eight grid nodes and trilinear weights around a position inside the grid.
struct Stencil {
  std::array<std::size_t, 8> node{};
  std::array<double, 8> weight{};
};

/// Dense G^3 grid of raw density and 4-channel latent features over an
/// axis-aligned cube. Node (i, j, k) sits at lo + (i, j, k) * spacing with
/// G nodes per axis spanning the cube. Density is softplus(raw) after interpolation.
class LatentField {
 public:
  LatentField() = default;
  LatentField(int resolution, double half_extent, const Vec3& center = Vec3::Zero(), double raw_density = -2.0,
              double feature = 0.0)
      : g_(resolution), half_(half_extent), center_(center) {
    require(resolution >= 2, ErrorKind::kInvalidArgument, "field resolution must be at least 2");
    require(half_extent > 0.0 && std::isfinite(half_extent), ErrorKind::kInvalidArgument,
            "field bbox must be nondegenerate");
    const std::size_t n = static_cast<std::size_t>(g_) * g_ * g_;
    params_.assign(n * (1 + kFeatureChannels), feature);
    std::fill(params_.begin(), params_.begin() + static_cast<std::ptrdiff_t>(n), raw_density);
  }

  int resolution() const noexcept { return g_; }
  double half_extent() const noexcept { return half_; }
  const Vec3& center() const noexcept { return center_; }
  double spacing() const noexcept { return 2.0 * half_ / (g_ - 1); }
  std::size_t nodes() const noexcept { return static_cast<std::size_t>(g_) * g_ * g_; }

  /// Flat parameter vector: G^3 raw densities, then G^3 x 4 features (node-major).
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  double& raw_density(std::size_t node) { return params_[node]; }
  double raw_density(std::size_t node) const { return params_[node]; }
  double& feature(std::size_t node, int c) { return params_[nodes() + node * kFeatureChannels + c]; }
  double feature(std::size_t node, int c) const { return params_[nodes() + node * kFeatureChannels + c]; }

  std::size_t node_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * g_ + j) * g_ + i;
  }
  Vec3 node_position(int i, int j, int k) const {
    return center_ - Vec3::Constant(half_) + spacing() * Vec3(i, j, k);
  }

  bool contains(const Vec3& p) const {
    const Vec3 d = (p - center_).cwiseAbs();
    return d.x() <= half_ && d.y() <= half_ && d.z() <= half_;
  }

  /// Trilinear stencil; false when p lies outside the cube.
  bool stencil(const Vec3& p, Stencil& s) const {
    if (!contains(p)) return false;
    const Vec3 g = (p - center_ + Vec3::Constant(half_)) / spacing();
    int base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
      base[a] = std::min(g_ - 2, std::max(0, static_cast<int>(std::floor(g[a]))));
      frac[a] = g[a] - base[a];
    }
    for (int c = 0; c < 8; ++c) {
      const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
      s.node[c] = node_index(base[0] + dx, base[1] + dy, base[2] + dz);
      s.weight[c] = (dx ? frac[0] : 1 - frac[0]) * (dy ? frac[1] : 1 - frac[1]) * (dz ? frac[2] : 1 - frac[2]);
    }
    return true;
  }

  double interpolate_raw_density(const Stencil& s) const {
    double v = 0.0;
    for (int c = 0; c < 8; ++c) v += s.weight[c] * raw_density(s.node[c]);
    return v;
  }

  std::array<double, kFeatureChannels> interpolate_feature(const Stencil& s) const {
    std::array<double, kFeatureChannels> f{};
    for (int c = 0; c < 8; ++c) {
      const double* node = &params_[nodes() + s.node[c] * kFeatureChannels];
      for (int ch = 0; ch < kFeatureChannels; ++ch) f[ch] += s.weight[c] * node[ch];
    }
    return f;
  }

  struct Sample {
    double sigma = 0.0;
    std::array<double, kFeatureChannels> feature{};
  };

  /// Density and feature at p; zero outside the cube.
  Sample query(const Vec3& p) const {
    Stencil s;
    if (!stencil(p, s)) return {};
    return {softplus(interpolate_raw_density(s)), interpolate_feature(s)};
  }

  bool all_finite() const {
    for (double v : params_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const LatentField&, const LatentField&) = default;

 private:
  int g_ = 0;
  double half_ = 1.0;
  Vec3 center_ = Vec3::Zero();
  std::vector<double> params_;
};

/// Checkpoint: u32 header length, JSON header, float32 raw densities then features.
inline std::string encode_checkpoint(const LatentField& field, long iteration) {
  const nlohmann::json header = {{"format", "ditto-latent-field"},
                                 {"version", 1},
                                 {"resolution", field.resolution()},
                                 {"half_extent", field.half_extent()},
                                 {"center", {field.center().x(), field.center().y(), field.center().z()}},
                                 {"channels", kFeatureChannels},
                                 {"iteration", iteration}};
  const std::string h = header.dump();
  std::string out;
  io::put_u32(out, static_cast<std::uint32_t>(h.size()));
  out += h;
  out += io::encode_f32(field.params());
  return out;
}

struct Checkpoint {
  LatentField field;
  long iteration = 0;
};

inline Checkpoint decode_checkpoint(std::string_view bytes) {
  require(bytes.size() >= 4, ErrorKind::kIo, "checkpoint truncated");
  const std::uint32_t n = io::get_u32(reinterpret_cast<const unsigned char*>(bytes.data()));
  require(bytes.size() >= 4 + static_cast<std::size_t>(n), ErrorKind::kIo, "checkpoint header truncated");
  const auto header = nlohmann::json::parse(bytes.substr(4, n));
  require(header.value("format", "") == "ditto-latent-field", ErrorKind::kIo, "not a latent field checkpoint");
  const auto& c = header.at("center");
  Checkpoint ck{LatentField(header.at("resolution").get<int>(), header.at("half_extent").get<double>(),
                            Vec3(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>())),
                header.at("iteration").get<long>()};
  const auto values = io::decode_f32(bytes.substr(4 + n));
  require(values.size() == ck.field.params().size(), ErrorKind::kIo, "checkpoint payload size mismatch");
  std::copy(values.begin(), values.end(), ck.field.params().begin());
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const LatentField& field, long iteration) {
  io::write_file(path, encode_checkpoint(field, iteration));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace ditto::latentfield
