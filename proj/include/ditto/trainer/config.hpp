// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <string>

#include "ditto/core/error.hpp"
#include "ditto/prerender/pose.hpp"
#include "ditto/viewsampler/pgvs.hpp"

namespace ditto::trainer {

enum class SamplerKind { kPgvs, kMovingBeta, kDiscreteAccumulation };

inline const char* to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::kPgvs: return "pgvs";
    case SamplerKind::kMovingBeta: return "moving_beta";
    case SamplerKind::kDiscreteAccumulation: return "discrete_accumulation";
  }
  return "pgvs";
}

inline SamplerKind sampler_from_string(const std::string& s) {
  if (s == "pgvs") return SamplerKind::kPgvs;
  if (s == "moving_beta") return SamplerKind::kMovingBeta;
  if (s == "discrete_accumulation") return SamplerKind::kDiscreteAccumulation;
  fail(ErrorKind::kInvalidArgument, "unknown sampler '" + s + "'");
}

/// Every constant of a training run. Defaults are the full-size settings.
struct TrainConfig {
  // schedule
  int t_total = 5000;
  double f_ref = 0.1;  // fraction of iterations spent in refinement

  // loss weights
  double lambda_isds = 1.0;
  double lambda_sp = 5e-5;
  double zeta = 2.0;           // foreground weight of the reliability loss
  double lambda_eta = 8.0;     // background weight decay constant
  double eta_time_unit = 100;  // iterations per unit of t in the decay
  double eps_clip = 1e-5;

  // patch refinement
  int n_patch = 256;
  int s_patch = 16;

  // view sampling
  SamplerKind sampler = SamplerKind::kPgvs;
  double alpha0 = 2.0;
  double beta0 = 8.0;
  double t_u = 1500;
  double accumulation_r = 0.65;
  int accumulation_intervals = 6;
  prerender::AngleBox ib_bounds;
  double phi_min = -30.0;  // global elevation range for sampling
  double phi_max = 45.0;

  // scaffold and view bank
  int n_prerender = 64;
  double camera_radius = 3.0;
  int image_side = 512;
  int grid_depth = 7;
  double trim_quantile = 0.1;
  int outlier_neighbors = 5;
  double outlier_std_ratio = 1.0;
  int normal_neighbors = 16;

  // field and rendering
  int field_resolution = 64;
  double field_half_extent = 1.0;
  double init_raw_density = 0.0;  // softplus(0) = ln 2 per unit length
  int latent_side = 64;  // rendering dimension before refinement; doubles by the end
  int samples_per_ray = 64;
  double depth_margin = 1.5;

  // optimizer
  double learning_rate = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-15;

  // guidance
  double tau_min = 0.02;
  double tau_max = 0.98;

  // output and bookkeeping
  int orbit_frames = 120;
  double orbit_phi = 15.0;
  int eval_every = 50;
  std::uint64_t seed = 0;

  int refinement_start() const { return static_cast<int>(std::lround(t_total * (1.0 - f_ref))); }

  viewsampler::PgvsParams pgvs() const {
    viewsampler::PgvsParams p;
    p.alpha0 = alpha0;
    p.beta0 = beta0;
    p.t_u = t_u;
    p.t_total = t_total;
    p.ib_theta = ib_bounds.theta_center();
    p.ib_phi = ib_bounds.phi_center();
    p.phi_min = phi_min;
    p.phi_max = phi_max;
    return p;
  }

  void validate() const {
    auto check = [](bool ok, const char* what) { require(ok, ErrorKind::kInvalidArgument, what); };
    check(t_total >= 1, "t_total must be positive");
    check(f_ref > 0.0 && f_ref < 1.0, "f_ref must lie in (0, 1)");
    check(lambda_isds >= 0 && lambda_sp >= 0 && zeta >= 0 && lambda_eta > 0, "loss weights must be nonnegative");
    check(eta_time_unit > 0, "eta_time_unit must be positive");
    check(eps_clip > 0.0 && eps_clip < 0.5, "eps_clip must lie in (0, 0.5)");
    check(n_patch >= 0 && s_patch >= 1, "bad patch settings");
    check(s_patch <= latent_side, "patch side exceeds the latent side");
    check(n_prerender >= 1, "need at least one pre-rendered view");
    check(camera_radius > field_half_extent * std::sqrt(3.0), "camera must sit outside the field");
    check(image_side >= 8 && image_side % 8 == 0, "image side must be a positive multiple of 8");
    check(field_resolution >= 2 && field_half_extent > 0, "bad field settings");
    check(latent_side >= 1 && samples_per_ray >= 1 && depth_margin > 0, "bad render settings");
    check(learning_rate > 0 && adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 &&
              adam_eps > 0,
          "bad optimizer settings");
    check(tau_min > 0.0 && tau_min <= tau_max && tau_max < 1.0, "tau range must lie inside (0, 1)");
    check(orbit_frames >= 0 && eval_every >= 1, "bad output settings");
    check(ib_bounds.theta_min <= ib_bounds.theta_max && ib_bounds.phi_min <= ib_bounds.phi_max, "bad IB bounds");
    check(accumulation_r > 0 && accumulation_r < 1 && accumulation_intervals >= 2, "bad accumulation settings");
    pgvs().validate();
  }

  /// Desk-scale preset: 600 iterations, 32^3 grid, 32^2 latents, 16 views. Patches keep
  /// their size relative to the final rendering dimension.
  static TrainConfig scaled() {
    TrainConfig c;
    c.t_total = 600;
    c.t_u = 180;
    c.field_resolution = 32;
    c.latent_side = 32;
    c.n_prerender = 16;
    c.s_patch = 8;
    c.image_side = 256;
    c.orbit_frames = 12;
    return c;
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {
      {"t_total", c.t_total},
      {"f_ref", c.f_ref},
      {"lambda_isds", c.lambda_isds},
      {"lambda_sp", c.lambda_sp},
      {"zeta", c.zeta},
      {"lambda_eta", c.lambda_eta},
      {"eta_time_unit", c.eta_time_unit},
      {"eps_clip", c.eps_clip},
      {"n_patch", c.n_patch},
      {"s_patch", c.s_patch},
      {"sampler", to_string(c.sampler)},
      {"alpha0", c.alpha0},
      {"beta0", c.beta0},
      {"t_u", c.t_u},
      {"accumulation_r", c.accumulation_r},
      {"accumulation_intervals", c.accumulation_intervals},
      {"ib_bounds",
       {c.ib_bounds.theta_min, c.ib_bounds.theta_max, c.ib_bounds.phi_min, c.ib_bounds.phi_max}},
      {"phi_min", c.phi_min},
      {"phi_max", c.phi_max},
      {"n_prerender", c.n_prerender},
      {"camera_radius", c.camera_radius},
      {"image_side", c.image_side},
      {"grid_depth", c.grid_depth},
      {"trim_quantile", c.trim_quantile},
      {"outlier_neighbors", c.outlier_neighbors},
      {"outlier_std_ratio", c.outlier_std_ratio},
      {"normal_neighbors", c.normal_neighbors},
      {"field_resolution", c.field_resolution},
      {"field_half_extent", c.field_half_extent},
      {"init_raw_density", c.init_raw_density},
      {"latent_side", c.latent_side},
      {"samples_per_ray", c.samples_per_ray},
      {"depth_margin", c.depth_margin},
      {"learning_rate", c.learning_rate},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"adam_eps", c.adam_eps},
      {"tau_min", c.tau_min},
      {"tau_max", c.tau_max},
      {"orbit_frames", c.orbit_frames},
      {"orbit_phi", c.orbit_phi},
      {"eval_every", c.eval_every},
      {"seed", c.seed},
  };
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base = {}) {
  require(j.is_object(), ErrorKind::kInvalidArgument, "config must be a JSON object");
  const nlohmann::json known = to_json(base);
  for (const auto& [key, _] : j.items())
    require(known.contains(key), ErrorKind::kInvalidArgument, "unknown config key '" + key + "'");
  TrainConfig c = base;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("t_total", c.t_total);
    get("f_ref", c.f_ref);
    get("lambda_isds", c.lambda_isds);
    get("lambda_sp", c.lambda_sp);
    get("zeta", c.zeta);
    get("lambda_eta", c.lambda_eta);
    get("eta_time_unit", c.eta_time_unit);
    get("eps_clip", c.eps_clip);
    get("n_patch", c.n_patch);
    get("s_patch", c.s_patch);
    if (j.contains("sampler")) c.sampler = sampler_from_string(j.at("sampler").get<std::string>());
    get("alpha0", c.alpha0);
    get("beta0", c.beta0);
    get("t_u", c.t_u);
    get("accumulation_r", c.accumulation_r);
    get("accumulation_intervals", c.accumulation_intervals);
    if (j.contains("ib_bounds")) {
      const auto& b = j.at("ib_bounds");
      require(b.is_array() && b.size() == 4, ErrorKind::kInvalidArgument,
              "ib_bounds must be [theta_min, theta_max, phi_min, phi_max]");
      c.ib_bounds = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    }
    get("phi_min", c.phi_min);
    get("phi_max", c.phi_max);
    get("n_prerender", c.n_prerender);
    get("camera_radius", c.camera_radius);
    get("image_side", c.image_side);
    get("grid_depth", c.grid_depth);
    get("trim_quantile", c.trim_quantile);
    get("outlier_neighbors", c.outlier_neighbors);
    get("outlier_std_ratio", c.outlier_std_ratio);
    get("normal_neighbors", c.normal_neighbors);
    get("field_resolution", c.field_resolution);
    get("field_half_extent", c.field_half_extent);
    get("init_raw_density", c.init_raw_density);
    get("latent_side", c.latent_side);
    get("samples_per_ray", c.samples_per_ray);
    get("depth_margin", c.depth_margin);
    get("learning_rate", c.learning_rate);
    get("adam_beta1", c.adam_beta1);
    get("adam_beta2", c.adam_beta2);
    get("adam_eps", c.adam_eps);
    get("tau_min", c.tau_min);
    get("tau_max", c.tau_max);
    get("orbit_frames", c.orbit_frames);
    get("orbit_phi", c.orbit_phi);
    get("eval_every", c.eval_every);
    get("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace ditto::trainer
