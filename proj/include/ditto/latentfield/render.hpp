// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "ditto/core/tensor.hpp"
#include "ditto/latentfield/field.hpp"
#include "ditto/prerender/pose.hpp"

namespace ditto::latentfield {

struct RayBundle {
  std::vector<Vec3> origins;
  std::vector<Vec3> directions;  // unit length
  int height = 0;                // image plane layout, height * width == ray count
  int width = 0;
  int samples_per_ray = 64;
  double near = 1.5;
  double far = 4.5;

  std::size_t size() const { return origins.size(); }

  void validate() const {
    require(origins.size() == directions.size(), ErrorKind::kShapeMismatch, "ray origin/direction count mismatch");
    require(static_cast<std::size_t>(height) * width == origins.size(), ErrorKind::kShapeMismatch,
            "ray count does not match the image layout");
    require(samples_per_ray >= 1, ErrorKind::kInvalidArgument, "need at least one sample per ray");
    require(near < far && near >= 0.0, ErrorKind::kInvalidArgument, "need 0 <= near < far");
    for (const auto& d : directions)
      require(std::abs(d.norm() - 1.0) <= 1e-6, ErrorKind::kInvalidArgument, "ray directions must be unit length");
  }
};

struct RenderOutput {
  Tensor z;                     // kFeatureChannels x h x w, no background
  Tensor alpha;                 // 1 x h x w
  std::vector<double> weights;  // rays x samples_per_ray compositing weights
};

/// Image-plane resolution and sampling used to generate rays.
struct RenderSettings {
  int height = 64;
  int width = 64;
  int min_side = 64;  // allowed range for upsample_render_dim
  int max_side = 128;
  int samples_per_ray = 64;
  double depth_margin = 1.5;  // near/far = radius -+ margin
  geometry::CameraIntrinsics intrinsics = geometry::default_intrinsics();
  int intrinsics_side = 512;  // image side the intrinsics refer to

  /// Re-targets the image plane of subsequent ray generation; grids are untouched.
  void upsample_render_dim(int h, int w) {
    require(h >= min_side && h <= max_side && w >= min_side && w <= max_side, ErrorKind::kInvalidArgument,
            "render dimension outside the configured range");
    height = h;
    width = w;
  }
  std::size_t rays_per_frame() const { return static_cast<std::size_t>(height) * width; }
};

/// One ray per latent pixel. The intrinsics are rescaled so that latent pixel
/// (u, v) looks through the center of the image block it pools.
inline RayBundle generate_rays(const prerender::CameraPose& pose, const RenderSettings& s) {
  pose.validate();
  const auto kx = s.intrinsics.scaled(s.intrinsics_side, s.width);
  const auto ky = s.intrinsics.scaled(s.intrinsics_side, s.height);
  const auto frame = pose.frame();
  RayBundle rays;
  rays.height = s.height;
  rays.width = s.width;
  rays.samples_per_ray = s.samples_per_ray;
  rays.near = std::max(0.0, pose.radius - s.depth_margin);
  rays.far = pose.radius + s.depth_margin;
  rays.origins.assign(s.rays_per_frame(), frame.position);
  rays.directions.reserve(s.rays_per_frame());
  for (int v = 0; v < s.height; ++v)
    for (int u = 0; u < s.width; ++u) {
      const Vec3 cam((u - kx.cx) / kx.fx, (v - ky.cy) / ky.fy, 1.0);
      rays.directions.push_back(frame.direction_to_world(cam).normalized());
    }
  return rays;
}

/// Emission-absorption compositing along stratified bin midpoints:
/// w_i = T_i (1 - exp(-sigma_i delta)), z = sum w_i f_i, alpha = sum w_i.
inline RenderOutput render(const LatentField& field, const RayBundle& rays) {
  rays.validate();
  const int S = rays.samples_per_ray;
  const double delta = (rays.far - rays.near) / S;
  RenderOutput out{Tensor(kFeatureChannels, rays.height, rays.width), Tensor(1, rays.height, rays.width),
                   std::vector<double>(rays.size() * S, 0.0)};
  Stencil st;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const int y = static_cast<int>(r) / rays.width, x = static_cast<int>(r) % rays.width;
    double log_t = 0.0;  // log transmittance before the current sample
    double z[kFeatureChannels] = {0, 0, 0, 0};
    double alpha = 0.0;
    for (int i = 0; i < S; ++i) {
      const Vec3 p = rays.origins[r] + (rays.near + (i + 0.5) * delta) * rays.directions[r];
      if (!field.stencil(p, st)) continue;
      const double tau = softplus(field.interpolate_raw_density(st)) * delta;
      const double w = std::exp(log_t) * -std::expm1(-tau);
      log_t -= tau;
      if (w == 0.0) continue;
      const auto f = field.interpolate_feature(st);
      for (int c = 0; c < kFeatureChannels; ++c) z[c] += w * f[c];
      alpha += w;
      out.weights[r * S + i] = w;
    }
    for (int c = 0; c < kFeatureChannels; ++c) out.z(c, y, x) = z[c];
    out.alpha(0, y, x) = std::min(1.0, alpha);
  }
  return out;
}

/// Gradients of a scalar loss w.r.t. the flat field parameters, given dL/dz and dL/dalpha
/// for the same rays. Interpolation is recomputed; compositing uses the forward weights.
inline void backprop(const LatentField& field, const RayBundle& rays, const RenderOutput& fwd, const Tensor& dl_dz,
                     const Tensor& dl_dalpha, std::span<double> grad) {
  rays.validate();
  require(dl_dz.channels() == kFeatureChannels && dl_dz.height() == rays.height && dl_dz.width() == rays.width,
          ErrorKind::kShapeMismatch, "dL/dz shape does not match the ray bundle");
  require(dl_dalpha.channels() == 1 && dl_dalpha.height() == rays.height && dl_dalpha.width() == rays.width,
          ErrorKind::kShapeMismatch, "dL/dalpha shape does not match the ray bundle");
  require(grad.size() == field.params().size(), ErrorKind::kShapeMismatch, "gradient buffer size mismatch");
  const int S = rays.samples_per_ray;
  require(fwd.weights.size() == rays.size() * S, ErrorKind::kShapeMismatch, "forward state is for different rays");
  const double delta = (rays.far - rays.near) / S;
  const std::size_t nodes = field.nodes();

  std::vector<Stencil> stencils(S);
  std::vector<char> inside(S);
  std::vector<double> raw(S), tau(S);
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const int y = static_cast<int>(r) / rays.width, x = static_cast<int>(r) % rays.width;
    double gz[kFeatureChannels];
    bool any = dl_dalpha(0, y, x) != 0.0;
    for (int c = 0; c < kFeatureChannels; ++c) {
      gz[c] = dl_dz(c, y, x);
      any = any || gz[c] != 0.0;
    }
    if (!any) continue;
    const double ga = dl_dalpha(0, y, x);

    double log_t = 0.0;
    for (int i = 0; i < S; ++i) {
      const Vec3 p = rays.origins[r] + (rays.near + (i + 0.5) * delta) * rays.directions[r];
      inside[i] = field.stencil(p, stencils[i]);
      if (!inside[i]) continue;
      raw[i] = field.interpolate_raw_density(stencils[i]);
      tau[i] = softplus(raw[i]) * delta;
      log_t -= tau[i];
    }
    const double t_end = std::exp(log_t);  // 1 - alpha

    // Walk back to front, carrying S_{>i} = sum_{k>i} w_k f_k (dotted with gz).
    double tail = 0.0;
    double log_t_next = log_t;  // log T_{i+1}
    for (int i = S - 1; i >= 0; --i) {
      if (!inside[i]) continue;
      const double w = fwd.weights[r * S + i];
      const Stencil& s = stencils[i];
      const auto f = field.interpolate_feature(s);
      double gf = 0.0;
      for (int c = 0; c < kFeatureChannels; ++c) gf += gz[c] * f[c];
      const double d_tau = std::exp(log_t_next) * gf - tail + ga * t_end;
      const double d_raw = d_tau * delta * sigmoid(raw[i]);
      for (int c8 = 0; c8 < 8; ++c8) {
        const double tw = s.weight[c8];
        if (tw == 0.0) continue;
        grad[s.node[c8]] += tw * d_raw;
        double* g = &grad[nodes + s.node[c8] * kFeatureChannels];
        for (int c = 0; c < kFeatureChannels; ++c) g[c] += tw * w * gz[c];
      }
      tail += w * gf;
      log_t_next += tau[i];
    }
  }
}

/// Adds the background latent behind the rendered latent: z + (1 - alpha) * bg.
inline Tensor composite_background(const RenderOutput& out, std::span<const double> bg) {
  require(bg.size() == kFeatureChannels, ErrorKind::kShapeMismatch, "background must have one value per channel");
  Tensor z = out.z;
  for (int c = 0; c < kFeatureChannels; ++c)
    for (int y = 0; y < z.height(); ++y)
      for (int x = 0; x < z.width(); ++x) z(c, y, x) += (1.0 - out.alpha(0, y, x)) * bg[c];
  return z;
}

/// Pulls a gradient on the composited latent back to (dL/dz, dL/dalpha) of the raw render.
inline Tensor background_alpha_gradient(const Tensor& dl_dcomposite, std::span<const double> bg) {
  Tensor ga(1, dl_dcomposite.height(), dl_dcomposite.width());
  for (int c = 0; c < kFeatureChannels; ++c)
    for (int y = 0; y < ga.height(); ++y)
      for (int x = 0; x < ga.width(); ++x) ga(0, y, x) -= dl_dcomposite(c, y, x) * bg[c];
  return ga;
}

}  // namespace ditto::latentfield
