// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ditto/geometry/cleaning.hpp"
#include "ditto/geometry/poisson.hpp"
#include "ditto/geometry/primitives.hpp"
#include "ditto/geometry/topology.hpp"
#include "ditto/guidance/oracle.hpp"
#include "ditto/latentfield/render.hpp"
#include "ditto/trainer/losses.hpp"
#include "ditto/trainer/pipeline.hpp"
#include "ditto/trainer/schedule.hpp"
#include "ditto/viewsampler/pgvs.hpp"
#include "support/stats.hpp"

namespace {

using namespace ditto;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome pgvs_distribution() {
  using namespace viewsampler;
  const auto t0 = Clock::now();
  const PgvsParams p;  // t_total 5000
  Outcome o;
  const bool endpoints = alpha_beta(0, p) == std::make_pair(3.0, 9.0) && alpha_beta(p.t_u, p) == std::make_pair(1.0, 1.0);
  o.pass = endpoints;
  std::ostringstream d;
  d << "endpoints " << (endpoints ? "exact" : "WRONG");
  std::mt19937_64 rng(2026);
  auto u = [&] { return std::generate_canonical<double, 53>(rng); };
  for (double t : {0.0, 750.0, 1500.0, 3000.0}) {
    const auto dist = pgvs_distribution(t, p);
    const auto [a, b] = alpha_beta(t, p);
    std::vector<double> xs;
    const int n = 100000;
    xs.reserve(n);
    for (int i = 0; i < n; ++i) {
      const auto [theta, phi] = pgvs_sample(dist, p, u(), u(), u(), u());
      (void)phi;
      const double dev = prerender::wrap_degrees(theta - p.ib_theta + 180.0) - 180.0;
      xs.push_back(std::abs(dev) / p.theta_half_range);
    }
    // Oracle: the regularized incomplete beta function from Boost.
    const double ks = stats::ks_statistic(xs, [a = a, b = b](double x) { return stats::beta_cdf(x, a, b); });
    const double pv = stats::ks_pvalue(ks, n);
    o.pass = o.pass && pv > 0.01;
    d << "; t=" << t << " p=" << fmt("%.3f", pv);
  }
  const double s = seconds_since(t0);
  o.pass = o.pass && s < 10.0;
  d << "; " << fmt("%.1f", s) << " s (limit 10)";
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome geometry_oracle() {
  using namespace geometry;
  const auto t0 = Clock::now();
  const auto pc = sample_sphere(20000);
  const auto mesh = poisson_reconstruct(pc, PoissonOptions{.grid_depth = 7});
  std::vector<double> err;
  for (const auto& v : mesh.vertices) err.push_back(std::abs(v.norm() - 1.0));
  std::sort(err.begin(), err.end());
  const double p95 = err.empty() ? 1e9 : err[static_cast<std::size_t>(0.95 * (err.size() - 1))];
  const bool watertight = is_watertight(mesh);

  PointCloud noisy = pc;
  std::mt19937 rng(12);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10; ++i) {
    noisy.points.push_back(10.0 * Vec3(g(rng), g(rng), g(rng)).normalized());
    noisy.normals.push_back(Vec3::UnitZ());
    if (!noisy.colors.empty()) noisy.colors.push_back(Vec3::Ones());
  }
  const auto clean = remove_outliers(noisy, 5, 1.0);
  int far_left = 0;
  for (const auto& q : clean.points) far_left += q.norm() > 2.0;
  const double s = seconds_since(t0);

  Outcome o;
  o.pass = p95 < 0.05 && watertight && far_left == 0 && s < 120.0;
  o.detail = "p95 radial error " + fmt("%.4f", p95) + " (limit 0.05); watertight " + (watertight ? "yes" : "NO") +
             "; planted outliers left " + std::to_string(far_left) + "/10; " + fmt("%.1f", s) + " s (limit 120)";
  return o;
}

// ---------------------------------------------------------------------------

Outcome renderer_gradients() {
  using namespace latentfield;
  const auto t0 = Clock::now();
  RenderSettings rs;
  rs.height = rs.width = 6;
  rs.min_side = 1;
  rs.max_side = 256;
  rs.samples_per_ray = 24;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  auto weighted = [](const RenderOutput& out, const Tensor& gz, const Tensor& ga) {
    double l = 0;
    for (std::size_t i = 0; i < gz.size(); ++i) l += gz.data()[i] * out.z.data()[i];
    for (std::size_t i = 0; i < ga.size(); ++i) l += ga.data()[i] * out.alpha.data()[i];
    return l;
  };
  double worst = 0.0;
  int checks = 0;
  for (int state = 0; state < 10; ++state) {
    LatentField field(6, 1.0);
    const double mean = -2.0 + 0.4 * state;
    for (std::size_t i = 0; i < field.nodes(); ++i) field.raw_density(i) = mean + n(rng);
    for (std::size_t i = 0; i < field.nodes(); ++i)
      for (int c = 0; c < kFeatureChannels; ++c) field.feature(i, c) = n(rng);
    const prerender::CameraPose pose{36.0 * state, -25.0 + 6.0 * state};
    const auto rays = generate_rays(pose, rs);
    Tensor gz(kFeatureChannels, 6, 6), ga(1, 6, 6);
    for (double& v : gz.data()) v = n(rng);
    for (double& v : ga.data()) v = n(rng);
    const auto fwd = render(field, rays);
    std::vector<double> grad(field.params().size(), 0.0);
    backprop(field, rays, fwd, gz, ga, grad);
    for (int dir = 0; dir < 32; ++dir) {
      std::vector<double> d(grad.size());
      for (double& v : d) v = n(rng);
      const double analytic = std::inner_product(grad.begin(), grad.end(), d.begin(), 0.0);
      const double h = 1e-4;
      auto plus = field, minus = field;
      for (std::size_t i = 0; i < d.size(); ++i) {
        plus.params()[i] += h * d[i];
        minus.params()[i] -= h * d[i];
      }
      const double numeric = (weighted(render(plus, rays), gz, ga) - weighted(render(minus, rays), gz, ga)) / (2 * h);
      worst = std::max(worst, std::abs(numeric - analytic) / std::max(1e-8, std::abs(numeric)));
      ++checks;
    }
  }
  const double s = seconds_since(t0);
  Outcome o;
  o.pass = worst < 1e-3 && s < 60.0;
  o.detail = std::to_string(checks) + " directional checks, worst relative error " + fmt("%.2e", worst) +
             " (limit 1e-3); " + fmt("%.1f", s) + " s (limit 60)";
  return o;
}

// ---------------------------------------------------------------------------

Outcome loss_units() {
  using namespace trainer;
  const TrainConfig cfg;
  std::ostringstream d;
  bool ok = true;

  const double lsp = sparsity_loss(Tensor(1, 8, 8, 0.5), cfg).value;
  const bool ln2 = std::abs(lsp - std::log(2.0)) <= 1e-9;
  ok = ok && ln2;
  d << "L_sp(0.5) - ln 2 = " << fmt("%.1e", lsp - std::log(2.0));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Tensor a(4, 6, 6), b(4, 6, 6);
  for (double& v : a.data()) v = n(rng);
  for (double& v : b.data()) v = n(rng);
  Tensor mask(1, 6, 6);
  for (int i = 0; i < 36; ++i) mask.data()[i] = i % 3 == 0;

  const auto zero = reliability_loss(a, a, mask, 300, cfg);
  const bool zero_ok = zero.value == 0.0 && std::all_of(zero.grad.data().begin(), zero.grad.data().end(),
                                                        [](double v) { return v == 0.0; });
  ok = ok && zero_ok;
  d << "; L_R(z, z) zero " << (zero_ok ? "yes" : "NO");

  double mean_abs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean_abs += std::abs(a.data()[i] - b.data()[i]);
  mean_abs /= a.size();
  const double full = reliability_loss(a, b, Tensor(1, 6, 6, 1.0), 0, cfg).value;
  const bool zeta_ok = std::abs(full - 2.0 * mean_abs) < 1e-12;
  ok = ok && zeta_ok;
  d << "; zeta case error " << fmt("%.1e", full - 2.0 * mean_abs);

  // Background weight at t = 1500 against a scalar recomputation.
  const double bg = reliability_loss(a, b, Tensor(1, 6, 6, 0.0), 1500, cfg).value;
  const double bg_expect = std::exp(-1500.0 / 100.0 / 8.0) * mean_abs;
  const bool eta_ok = std::abs(bg - bg_expect) < 1e-12;
  ok = ok && eta_ok;
  d << "; eta(1500) case error " << fmt("%.1e", bg - bg_expect);

  bool monotone = true;
  for (int t = 1; t <= cfg.t_total; ++t) monotone = monotone && eta(t, cfg) < eta(t - 1, cfg);
  ok = ok && monotone;
  d << "; eta strictly decreasing " << (monotone ? "yes" : "NO");
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------

Outcome schedule() {
  using namespace trainer;
  const TrainConfig cfg;  // t_total 5000, f_ref 0.1, L 64
  std::ostringstream d;
  const auto start = dimension_refine(4500, cfg), end = dimension_refine(5000, cfg);
  const bool ends = start == std::make_pair(64, 64) && end == std::make_pair(128, 128);
  bool linear = true;
  for (int i = 4500; i <= 5000; ++i) {
    const int expect = static_cast<int>(std::lround(64.0 + 64.0 * (i - 4500) / 500.0));
    const auto [h, w] = dimension_refine(i, cfg);
    linear = linear && h == expect && w == expect;
  }
  d << "dims 4500->(" << start.first << "," << start.second << ") 5000->(" << end.first << "," << end.second
    << ") linear " << (linear ? "yes" : "NO");

  const int S = 128, k = 16, N = 256, seeds = 40;
  const double closed_form = 1.0 - std::pow(1.0 - std::pow(double(k) / S, 2), N);
  double coverage = 0.0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(s);
    const Tensor m = add_patch(Tensor(1, S, S, 0.0), N, k, rng);
    coverage += std::accumulate(m.data().begin(), m.data().end(), 0.0) / (S * S);
  }
  coverage /= seeds;
  const bool cov_ok = std::abs(coverage - closed_form) <= 0.02;
  d << "; patch coverage " << fmt("%.4f", coverage) << " vs closed form " << fmt("%.4f", closed_form)
    << " (tolerance 0.02)";
  if (!cov_ok)
    d << " [placement over [0, S-k] has edge pixels covered less often; the closed form assumes wraparound]";
  return {ends && linear && cov_ok, d.str()};
}

// ---------------------------------------------------------------------------

struct ScaledRun {
  trainer::RunResult result;
  std::string checkpoint;
};

ScaledRun scaled_run(const trainer::TrainConfig& cfg) {
  guidance::SyntheticOracle oracle(guidance::two_tone_sphere(), geometry::default_intrinsics(), 512,
                                   trainer::reference_pose(cfg));
  trainer::RunHooks hooks;
  hooks.target = [&](const prerender::CameraPose& p, int side) { return oracle.target_latent(p, side); };
  hooks.eval_iterations = {50, cfg.t_total};
  hooks.render_frames = false;
  ScaledRun r;
  r.result = trainer::run(cfg, {"a two-tone ball", {}, {}, false}, oracle, hooks);
  r.checkpoint = latentfield::encode_checkpoint(r.result.field, cfg.t_total);
  return r;
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  const auto cfg = trainer::TrainConfig::scaled();
  const auto a = scaled_run(cfg);
  const auto b = scaled_run(cfg);
  const double s = seconds_since(t0);
  const auto e50 = a.result.evaluation_at(50), efin = a.result.evaluation_at(cfg.t_total);
  if (!e50 || !efin) return {false, "missing probe evaluations"};
  const double drop = e50->ib_error / efin->ib_error;
  const bool identical = a.checkpoint == b.checkpoint;
  Outcome o;
  o.pass = drop >= 5.0 && efin->ob_error < 2.0 * efin->ib_error && identical && s < 600.0;
  o.detail = "IB error " + fmt("%.4f", e50->ib_error) + " @50 -> " + fmt("%.4f", efin->ib_error) + " @" +
             std::to_string(cfg.t_total) + " (" + fmt("%.1f", drop) + "x, need 5x); final OB " +
             fmt("%.4f", efin->ob_error) + " < 2 x IB " + (efin->ob_error < 2.0 * efin->ib_error ? "yes" : "NO") +
             "; same-seed checkpoints identical " + (identical ? "yes" : "NO") + "; " + fmt("%.1f", s) +
             " s for two runs (limit 600)";
  return o;
}

// ---------------------------------------------------------------------------

Outcome gate_and_composition() {
  using namespace trainer;
  TrainConfig cfg = TrainConfig::scaled();
  cfg.t_total = 40;
  cfg.t_u = 12;
  cfg.n_prerender = 4;
  guidance::SyntheticOracle oracle(guidance::two_tone_sphere(), geometry::default_intrinsics(), 512,
                                   reference_pose(cfg));
  bool generated = false, metric = false;
  const auto rgbd = acquire_reference(cfg, {"ball", {}, {}, false}, oracle, generated, metric);
  const auto scaffold = prerender::build_scaffold(rgbd, reference_pose(cfg), scaffold_options(cfg, metric));
  const auto bank = build_bank(cfg, scaffold, oracle);
  Trainer t(cfg, bank, oracle, "a ball");

  int ob_steps = 0, ib_steps = 0, gate_violations = 0, ablation_violations = 0;
  auto vec_eq = [](const std::vector<double>& x, const std::vector<double>& y) { return x == y; };
  for (int i = 1; i <= cfg.t_total; ++i) {
    const bool refine = i > cfg.refinement_start();
    const StepPlan p = t.plan(i, refine);
    const TermWeights full = t.default_weights(p);
    const auto base = t.gradients(p, full);
    (p.is_ib ? ib_steps : ob_steps)++;
    if (!p.is_ib || refine) {
      bool zero = base.breakdown.l_R == 0.0;
      for (double v : base.reliability) zero = zero && v == 0.0;
      TermWeights open = full;
      open.reliability = 1.0;
      gate_violations += !zero || !vec_eq(t.gradients(p, open).total(), base.total());
    }
    const std::vector<double>* orig[3] = {&base.isds, &base.reliability, &base.sparsity};
    for (int k = 0; k < 3; ++k) {
      TermWeights w = full;
      (k == 0 ? w.isds : k == 1 ? w.reliability : w.sparsity) = 0.0;
      const auto ab = t.gradients(p, w);
      const std::vector<double>* kept[3] = {&ab.isds, &ab.reliability, &ab.sparsity};
      bool ok = true;
      for (int j = 0; j < 3; ++j)
        ok = ok && (j == k ? std::all_of(kept[j]->begin(), kept[j]->end(), [](double v) { return v == 0.0; })
                           : vec_eq(*kept[j], *orig[j]));
      const auto total = ab.total();
      for (std::size_t e = 0; e < total.size() && ok; ++e) {
        double rest = 0.0;
        for (int j = 0; j < 3; ++j)
          if (j != k) rest += (*orig[j])[e];
        ok = total[e] == rest;
      }
      ablation_violations += !ok;
    }
    t.step(i);
  }
  Outcome o;
  o.pass = gate_violations == 0 && ablation_violations == 0 && ob_steps > 0 && ib_steps > 0;
  o.detail = std::to_string(cfg.t_total) + " steps (" + std::to_string(ib_steps) + " IB, " + std::to_string(ob_steps) +
             " OB); gate violations " + std::to_string(gate_violations) + "; ablation mismatches " +
             std::to_string(ablation_violations) + " of " + std::to_string(3 * cfg.t_total);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"pgvs-distribution", pgvs_distribution},
      {"geometry-oracle", geometry_oracle},
      {"renderer-gradients", renderer_gradients},
      {"loss-unit-values", loss_units},
      {"schedule", schedule},
      {"end-to-end-synthetic", end_to_end},
      {"gate-and-composition", gate_and_composition},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %-22s %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
