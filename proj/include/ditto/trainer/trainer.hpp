// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ditto/guidance/interface.hpp"
#include "ditto/guidance/prompt.hpp"
#include "ditto/latentfield/render.hpp"
#include "ditto/prerender/view_bank.hpp"
#include "ditto/trainer/config.hpp"
#include "ditto/trainer/losses.hpp"
#include "ditto/trainer/optimizer.hpp"
#include "ditto/trainer/schedule.hpp"
#include "ditto/viewsampler/pgvs.hpp"

namespace ditto::trainer {

/// Latent the field composites over: the white backdrop under the stub codec.
inline constexpr std::array<double, latentfield::kFeatureChannels> kBackgroundLatent = {1.0, 1.0, 1.0, -1.0};

struct LossBreakdown {
  int iteration = 0;
  double theta = 0.0;
  double phi = 0.0;
  bool is_ib = false;
  bool refine = false;
  int side = 0;
  double tau = 0.0;
  double l_isds_grad_norm = 0.0;
  double l_R = 0.0;
  double l_sp = 0.0;
  double l_total_scalar = 0.0;  // reliability + weighted sparsity; the injected term has no scalar
};

inline nlohmann::json to_json(const LossBreakdown& b) {
  return {{"iteration", b.iteration}, {"theta", b.theta},   {"phi", b.phi},
          {"is_ib", b.is_ib},         {"refine", b.refine}, {"side", b.side},
          {"tau", b.tau},             {"l_isds_grad_norm", b.l_isds_grad_norm},
          {"l_R", b.l_R},             {"l_sp", b.l_sp},     {"l_total_scalar", b.l_total_scalar}};
}

/// Calls the guidance residual with one retry on timeouts and dropped connections.
inline Tensor request_residual(guidance::Guidance& g, const Tensor& z, const Tensor& mask, const std::string& prompt,
                               double tau, std::uint64_t seed, const std::optional<prerender::CameraPose>& pose) {
  for (int attempt = 0;; ++attempt) {
    try {
      return g.residual(z, mask, prompt, tau, seed, pose);
    } catch (const Error& e) {
      const bool transient = e.kind() == ErrorKind::kTimeout || e.kind() == ErrorKind::kConnectivity;
      if (!transient || attempt >= 1)
        throw StageError("guidance", e.kind(), std::string(e.what()) + (transient ? " (after one retry)" : ""));
    }
  }
}

inline double draw_tau(const TrainConfig& cfg, Rng& rng) {
  return cfg.tau_min + (cfg.tau_max - cfg.tau_min) * std::generate_canonical<double, 53>(rng);
}

/// Inpainting score-distillation gradient w.r.t. z: lambda_isds times the guidance
/// residual at a random diffusion timestep. The guidance model is not differentiated.
inline Tensor isds_inject(const Tensor& z, const Tensor& mask, const std::string& prompt, guidance::Guidance& g,
                          Rng& rng, const TrainConfig& cfg, const std::optional<prerender::CameraPose>& pose = {}) {
  const double tau = draw_tau(cfg, rng);
  const std::uint64_t seed = rng();
  if (cfg.lambda_isds == 0.0) return Tensor(z.channels(), z.height(), z.width());
  Tensor r = request_residual(g, z, mask, prompt, tau, seed, pose);
  for (double& v : r.data()) v *= cfg.lambda_isds;
  return r;
}

/// Everything drawn at random for one iteration. Gradients are a pure function of
/// the plan and the current field.
struct StepPlan {
  int iteration = 0;
  bool refine = false;
  prerender::CameraPose pose;
  bool is_ib = false;
  int side = 0;
  double tau = 0.5;
  std::uint64_t seed = 0;
  std::string prompt;
  std::vector<PatchPlacement> patches;
  int patch_side = 0;
};

/// Per-term parameter gradients. total() sums them in a fixed order.
struct TermGradients {
  std::vector<double> isds;
  std::vector<double> reliability;
  std::vector<double> sparsity;
  LossBreakdown breakdown;

  std::vector<double> total() const {
    std::vector<double> g(isds.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = isds[i] + reliability[i] + sparsity[i];
    return g;
  }
};

/// Multipliers of the three loss terms. Reliability is the in-boundary gate.
struct TermWeights {
  double isds = 1.0;
  double reliability = 1.0;
  double sparsity = 1.0;
};

struct Evaluation {
  int iteration = 0;
  double ib_error = 0.0;  // mean latent L1 over the in-boundary probe poses
  double ob_error = 0.0;  // same over the outer-boundary probe poses
};

inline nlohmann::json to_json(const Evaluation& e) {
  return {{"iteration", e.iteration}, {"ib_error", e.ib_error}, {"ob_error", e.ob_error}};
}

/// Target latent at a pose and side, used to score renders against a known scene.
using TargetFn = std::function<Tensor(const prerender::CameraPose&, int)>;

/// Fixed probe poses: four inside the in-boundary box, four around the back and top.
inline std::vector<prerender::CameraPose> ib_probe_poses(const TrainConfig& cfg) {
  const auto& b = cfg.ib_bounds;
  const double tc = b.theta_center(), pc = b.phi_center();
  const double dt = 0.25 * (b.theta_max - b.theta_min), dp = 0.25 * (b.phi_max - b.phi_min);
  std::vector<prerender::CameraPose> out;
  for (auto [t, p] : {std::pair{tc, pc}, {tc - dt, pc + dp}, {tc + dt, pc - dp}, {tc + dt, pc + dp}})
    out.push_back({t, p, cfg.camera_radius});
  return out;
}

inline std::vector<prerender::CameraPose> ob_probe_poses(const TrainConfig& cfg) {
  const double tc = cfg.ib_bounds.theta_center();
  std::vector<prerender::CameraPose> out;
  for (auto [dt, p] : {std::pair{180.0, 0.0}, {135.0, 15.0}, {-135.0, 15.0}, {180.0, 40.0}})
    out.push_back({prerender::wrap_degrees(tc + dt), std::min(p, cfg.phi_max), cfg.camera_radius});
  return out;
}

class Trainer {
 public:
  Trainer(TrainConfig cfg, prerender::ViewBank bank, guidance::Guidance& guidance, std::string text)
      : cfg_(std::move(cfg)),
        bank_(std::move(bank)),
        guidance_(guidance),
        text_(std::move(text)),
        field_(cfg_.field_resolution, cfg_.field_half_extent, geometry::Vec3::Zero(), cfg_.init_raw_density, 0.0),
        adam_(field_.params().size(), cfg_.learning_rate, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps),
        rng_(cfg_.seed) {
    cfg_.validate();
    require(!bank_.views.empty(), ErrorKind::kEmptyInput, "trainer needs a nonempty view bank");
    require(!text_.empty(), ErrorKind::kInvalidArgument, "trainer needs a text prompt");
    settings_.height = settings_.width = cfg_.latent_side;
    settings_.min_side = cfg_.latent_side;
    settings_.max_side = 2 * cfg_.latent_side;
    settings_.samples_per_ray = cfg_.samples_per_ray;
    settings_.depth_margin = cfg_.depth_margin;
  }

  const TrainConfig& config() const { return cfg_; }
  const latentfield::LatentField& field() const { return field_; }
  latentfield::LatentField& field() { return field_; }
  const prerender::ViewBank& bank() const { return bank_; }
  const latentfield::RenderSettings& render_settings() const { return settings_; }
  int iteration() const { return iteration_; }

  /// Draws the pose, timestep, seed and (during refinement) patches for iteration i.
  StepPlan plan(int i, bool refine) {
    StepPlan p;
    p.iteration = i;
    p.refine = refine;
    const auto params = cfg_.pgvs();
    const double u[4] = {canonical(), canonical(), canonical(), canonical()};
    std::pair<double, double> angles;
    switch (cfg_.sampler) {
      case SamplerKind::kPgvs: angles = viewsampler::pgvs_sample(i, params, u[0], u[1], u[2], u[3]); break;
      case SamplerKind::kMovingBeta:
        angles = viewsampler::moving_beta_sample(i, params, u[0], u[1], u[2], u[3]);
        break;
      case SamplerKind::kDiscreteAccumulation:
        angles = viewsampler::discrete_accum_sample(
            i, params, {cfg_.accumulation_r, cfg_.accumulation_intervals}, u[0], u[1], u[2], u[3]);
        break;
    }
    p.pose = {angles.first, angles.second, cfg_.camera_radius};
    p.is_ib = viewsampler::is_ib(p.pose.theta, p.pose.phi, bank_.ib_bounds);
    p.side = refine ? dimension_refine(i, cfg_).first : cfg_.latent_side;
    p.tau = draw_tau(cfg_, rng_);
    p.seed = rng_();
    const auto dir = guidance::direction_bucket(p.pose.theta, p.pose.phi, bank_.ib_bounds.theta_center());
    p.prompt = guidance::compose_prompt(text_, dir, false);
    if (refine && p.is_ib && cfg_.n_patch > 0) {
      p.patch_side = cfg_.s_patch;
      p.patches = place_patches(p.side, p.side, cfg_.n_patch, p.patch_side, rng_);
    }
    return p;
  }

  TermWeights default_weights(const StepPlan& p) const {
    return {cfg_.lambda_isds, p.is_ib && !p.refine ? 1.0 : 0.0, cfg_.lambda_sp};
  }

  /// Renders the plan's view and returns the gradient of each loss term w.r.t. the field.
  TermGradients gradients(const StepPlan& p, const TermWeights& w) const {
    auto settings = settings_;
    settings.upsample_render_dim(p.side, p.side);
    const auto rays = latentfield::generate_rays(p.pose, settings);
    const auto fwd = latentfield::render(field_, rays);
    const Tensor z_r = latentfield::composite_background(fwd, kBackgroundLatent);

    const std::size_t n = field_.params().size();
    TermGradients out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), {}};
    LossBreakdown& b = out.breakdown;
    b.iteration = p.iteration;
    b.theta = p.pose.theta;
    b.phi = p.pose.phi;
    b.is_ib = p.is_ib;
    b.refine = p.refine;
    b.side = p.side;
    b.tau = p.tau;

    // Regenerate mask (1 = inpaint) and the latent handed to guidance.
    Tensor regen(1, p.side, p.side, 1.0);
    Tensor z_in = z_r;
    std::optional<prerender::LatentLevel> ref;
    if (p.is_ib) {
      ref = prerender::find_closest(bank_, p.pose.theta, p.pose.phi).level_resized(p.side);
      for (int y = 0; y < p.side; ++y)
        for (int x = 0; x < p.side; ++x) regen(0, y, x) = 1.0 - ref->mask(0, y, x);
      stamp_patches(regen, p.patches, p.patch_side);
      for (int c = 0; c < z_in.channels(); ++c)
        for (int y = 0; y < p.side; ++y)
          for (int x = 0; x < p.side; ++x)
            if (regen(0, y, x) == 0.0) z_in(c, y, x) = ref->z(c, y, x);
    }

    const Tensor zero_alpha(1, p.side, p.side);
    auto backprop_latent = [&](const Tensor& dz, std::vector<double>& into) {
      latentfield::backprop(field_, rays, fwd, dz, latentfield::background_alpha_gradient(dz, kBackgroundLatent),
                            into);
    };

    if (w.isds != 0.0) {
      Tensor g = request_residual(guidance_, z_in, regen, p.prompt, p.tau, p.seed, p.pose);
      double norm2 = 0.0;
      for (int c = 0; c < g.channels(); ++c)
        for (int y = 0; y < p.side; ++y)
          for (int x = 0; x < p.side; ++x) {
            double& v = g(c, y, x);
            v *= w.isds * regen(0, y, x);
            norm2 += v * v;
          }
      b.l_isds_grad_norm = std::sqrt(norm2);
      backprop_latent(g, out.isds);
    }

    if (ref && w.reliability != 0.0) {
      LossValue lr = reliability_loss(z_r, ref->z, ref->mask, p.iteration, cfg_);
      for (double& v : lr.grad.data()) v *= w.reliability;
      b.l_R = w.reliability * lr.value;
      backprop_latent(lr.grad, out.reliability);
    }

    LossValue sp = sparsity_loss(fwd.alpha, cfg_);
    b.l_sp = sp.value;
    if (w.sparsity != 0.0) {
      for (double& v : sp.grad.data()) v *= w.sparsity;
      latentfield::backprop(field_, rays, fwd, Tensor(latentfield::kFeatureChannels, p.side, p.side), sp.grad,
                            out.sparsity);
    }
    b.l_total_scalar = b.l_R + w.sparsity * b.l_sp;
    return out;
  }

  LossBreakdown train_step(int i) { return run_step(i, false); }
  LossBreakdown refine_step(int i) { return run_step(i, true); }

  /// Iteration i in [1, t_total]: training up to the refinement start, refinement after.
  LossBreakdown step(int i) { return i <= cfg_.refinement_start() ? train_step(i) : refine_step(i); }

  /// Composited latent render at a pose and side.
  Tensor render_latent(const prerender::CameraPose& pose, int side) const {
    auto settings = settings_;
    settings.min_side = std::min(settings.min_side, side);
    settings.max_side = std::max(settings.max_side, side);
    settings.upsample_render_dim(side, side);
    const auto fwd = latentfield::render(field_, latentfield::generate_rays(pose, settings));
    return latentfield::composite_background(fwd, kBackgroundLatent);
  }

  Evaluation evaluate(const TargetFn& target, int side) const {
    auto mean_error = [&](const std::vector<prerender::CameraPose>& poses) {
      double acc = 0.0;
      for (const auto& pose : poses) acc += mean_abs_diff(render_latent(pose, side), target(pose, side));
      return acc / static_cast<double>(poses.size());
    };
    return {iteration_, mean_error(ib_probe_poses(cfg_)), mean_error(ob_probe_poses(cfg_))};
  }

 private:
  double canonical() { return std::generate_canonical<double, 53>(rng_); }

  LossBreakdown run_step(int i, bool refine) {
    require(i >= 1 && i <= cfg_.t_total, ErrorKind::kInvalidArgument, "iteration outside [1, t_total]");
    const StepPlan p = plan(i, refine);
    TermGradients g = gradients(p, default_weights(p));
    const auto total = g.total();
    adam_.step(field_.params(), total);
    iteration_ = i;
    return g.breakdown;
  }

  TrainConfig cfg_;
  prerender::ViewBank bank_;
  guidance::Guidance& guidance_;
  std::string text_;
  latentfield::LatentField field_;
  Adam adam_;
  Rng rng_;
  latentfield::RenderSettings settings_;
  int iteration_ = 0;
};

}  // namespace ditto::trainer
