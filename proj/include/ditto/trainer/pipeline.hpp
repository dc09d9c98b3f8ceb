// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ditto/guidance/interface.hpp"
#include "ditto/guidance/prompt.hpp"
#include "ditto/prerender/scaffold.hpp"
#include "ditto/prerender/view_bank.hpp"
#include "ditto/trainer/trainer.hpp"

namespace ditto::trainer {

struct RunInputs {
  std::string text;
  std::optional<Tensor> image;  // 3 x S x S in [0, 1]
  std::optional<Tensor> depth;  // 1 x S x S
  bool depth_is_metric = false;
};

struct RunHooks {
  TargetFn target;                                      // enables probe evaluations when set
  std::function<void(const LossBreakdown&)> on_step;    // progress reporting
  std::vector<int> eval_iterations;                     // evaluated in addition to every eval_every
  bool render_frames = true;
};

struct RunResult {
  latentfield::LatentField field;
  geometry::ScaffoldMesh scaffold;
  prerender::ViewBank bank;
  std::vector<LossBreakdown> history;
  std::vector<Evaluation> evaluations;
  std::vector<Tensor> frames;  // decoded RGB, one per orbit angle
  bool generated_reference = false;
  double seconds = 0.0;

  std::optional<Evaluation> evaluation_at(int iteration) const {
    for (const auto& e : evaluations)
      if (e.iteration == iteration) return e;
    return std::nullopt;
  }
};

/// Runs `fn`, re-throwing any failure as a StageError tagged with `stage`.
template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.kind(), e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, ErrorKind::kInvalidArgument, e.what());
  }
}

/// Frontal camera the reference image is taken from: the in-boundary center.
inline prerender::CameraPose reference_pose(const TrainConfig& cfg) {
  return {cfg.ib_bounds.theta_center(), cfg.ib_bounds.phi_center(), cfg.camera_radius};
}

/// Azimuth sweep around the object at a fixed elevation, starting from the front.
inline std::vector<prerender::CameraPose> orbit_poses(const TrainConfig& cfg) {
  std::vector<prerender::CameraPose> out;
  for (int k = 0; k < cfg.orbit_frames; ++k)
    out.push_back({prerender::wrap_degrees(cfg.ib_bounds.theta_center() + 360.0 * k / cfg.orbit_frames),
                   cfg.orbit_phi, cfg.camera_radius});
  return out;
}

inline prerender::ScaffoldOptions scaffold_options(const TrainConfig& cfg, bool metric) {
  prerender::ScaffoldOptions o;
  o.metric_depth = metric;
  o.outlier_neighbors = cfg.outlier_neighbors;
  o.outlier_std_ratio = cfg.outlier_std_ratio;
  o.normal_neighbors = cfg.normal_neighbors;
  o.grid_depth = cfg.grid_depth;
  o.trim_quantile = cfg.trim_quantile;
  return o;
}

inline prerender::PrerenderOptions prerender_options(const TrainConfig& cfg) {
  prerender::PrerenderOptions o;
  o.image_side = cfg.image_side;
  o.latent_sides = {cfg.latent_side, 2 * cfg.latent_side};
  return o;
}

/// Reference image and depth, requesting whichever is missing from guidance.
inline geometry::RgbdImage acquire_reference(const TrainConfig& cfg, const RunInputs& in, guidance::Guidance& g,
                                             bool& generated, bool& metric) {
  geometry::RgbdImage rgbd;
  generated = !in.image.has_value();
  if (generated) {
    rgbd.rgb = g.generate(guidance::compose_prompt(in.text, guidance::Direction::kNone, true), cfg.seed,
                          cfg.image_side);
  } else {
    rgbd.rgb = *in.image;
  }
  if (in.depth && !generated) {
    rgbd.depth = *in.depth;
    metric = in.depth_is_metric;
  } else {
    rgbd.depth = g.depth(rgbd.rgb);
    metric = g.metric_depth();
  }
  rgbd.validate();
  return rgbd;
}

/// Builds the scaffold and its view bank from the reference view.
inline prerender::ViewBank build_bank(const TrainConfig& cfg, const geometry::ScaffoldMesh& scaffold,
                                      guidance::Guidance& g) {
  const auto poses = prerender::sample_ib_poses(cfg.n_prerender, cfg.ib_bounds, cfg.seed, cfg.camera_radius);
  const guidance::GuidanceCodec codec(g);
  return prerender::build_view_bank(scaffold, poses, cfg.ib_bounds, codec, prerender_options(cfg));
}

inline nlohmann::json run_report(const TrainConfig& cfg, const RunResult& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& b : r.history) steps.push_back(to_json(b));
  nlohmann::json evals = nlohmann::json::array();
  for (const auto& e : r.evaluations) evals.push_back(to_json(e));
  return {{"config", to_json(cfg)},
          {"generated_reference", r.generated_reference},
          {"scaffold", {{"vertices", r.scaffold.vertices.size()}, {"faces", r.scaffold.faces.size()}}},
          {"views", r.bank.views.size()},
          {"steps", std::move(steps)},
          {"evaluations", std::move(evals)},
          {"frames", r.frames.size()},
          {"seconds", r.seconds}};
}

/// The whole pipeline: reference, scaffold, view bank, training and refinement, orbit export.
inline RunResult run(const TrainConfig& cfg, const RunInputs& in, guidance::Guidance& g, const RunHooks& hooks = {}) {
  const auto start = std::chrono::steady_clock::now();
  in_stage("config", [&] {
    cfg.validate();
    require(!in.text.empty(), ErrorKind::kInvalidArgument, "a text prompt is required");
    require(!in.depth || in.image, ErrorKind::kInvalidArgument, "a depth map needs its reference image");
  });
  RunResult out;
  bool metric = false;
  const auto rgbd = in_stage("reference", [&] { return acquire_reference(cfg, in, g, out.generated_reference, metric); });
  out.scaffold = in_stage("geometry", [&] {
    return prerender::build_scaffold(rgbd, reference_pose(cfg), scaffold_options(cfg, metric));
  });
  in_stage("geometry", [&] { require(!out.scaffold.empty(), ErrorKind::kEmptyInput, "scaffold mesh is empty"); });
  out.bank = in_stage("prerender", [&] { return build_bank(cfg, out.scaffold, g); });

  Trainer trainer(cfg, out.bank, g, in.text);
  auto evaluate = [&](int i) {
    if (!hooks.target) return;
    const bool listed = std::find(hooks.eval_iterations.begin(), hooks.eval_iterations.end(), i) !=
                        hooks.eval_iterations.end();
    if (i % cfg.eval_every == 0 || i == cfg.t_total || listed)
      out.evaluations.push_back(trainer.evaluate(hooks.target, cfg.latent_side));
  };
  in_stage("train", [&] {
    for (int i = 1; i <= cfg.t_total; ++i) {
      out.history.push_back(trainer.step(i));
      if (hooks.on_step) hooks.on_step(out.history.back());
      evaluate(i);
    }
  });
  out.field = trainer.field();

  if (hooks.render_frames) {
    in_stage("export", [&] {
      const int side = 2 * cfg.latent_side;
      for (const auto& pose : orbit_poses(cfg)) out.frames.push_back(g.decode(trainer.render_latent(pose, side)));
    });
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace ditto::trainer
