// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ditto/core/io.hpp"
#include "ditto/geometry/ply.hpp"
#include "ditto/guidance/oracle.hpp"
#include "ditto/guidance/remote.hpp"
#include "ditto/latentfield/field.hpp"
#include "ditto/trainer/pipeline.hpp"

#ifndef DITTO_BUILD_ID
#define DITTO_BUILD_ID "unknown"
#endif

namespace ditto::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kConnectivity = 3 };

inline constexpr const char* kEndpointEnv = "DITTO_ENDPOINT";

struct GuidanceFlags {
  std::string mode = "oracle";
  std::string endpoint;
  double timeout_seconds = 120;
};

struct RunFlags {
  std::string text;
  std::string image;
  std::string depth;
  bool metric_depth = false;
  GuidanceFlags guidance;
  std::string config;
  std::string out = "ditto_run";
  std::optional<std::uint64_t> seed;
  bool scaled = false;
  bool quiet = false;
};

struct ScaffoldFlags {
  std::string image;
  std::string depth;
  bool metric_depth = false;
  GuidanceFlags guidance;
  std::string config;
  int views = 64;
  std::string out = "ditto_scaffold";
  bool scaled = false;
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConnectivity:
    case ErrorKind::kTimeout: return kConnectivity;
    default: return kInternal;
  }
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string file_hash(const std::string& path) { return hex64(io::fnv1a(io::read_file(path))); }

/// Depth maps are tensor files (1 x S x S float32) or, for convenience, grayscale PNGs in [0, 1].
inline Tensor read_depth(const fs::path& path) {
  if (path.extension() == ".png") {
    const Tensor rgb = io::read_png(path);
    Tensor d(1, rgb.height(), rgb.width());
    for (int y = 0; y < d.height(); ++y)
      for (int x = 0; x < d.width(); ++x) d(0, y, x) = rgb(0, y, x);
    return d;
  }
  Tensor d = io::read_tensor(path);
  require(d.channels() == 1, ErrorKind::kShapeMismatch, "depth file must hold a single channel");
  return d;
}

/// Config layering: preset, then the JSON file, then flags.
inline trainer::TrainConfig load_config(const std::string& path, bool scaled) {
  trainer::TrainConfig base = scaled ? trainer::TrainConfig::scaled() : trainer::TrainConfig{};
  if (path.empty()) return base;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, "cannot parse config " + path + ": " + e.what());
  }
  return trainer::config_from_json(j, base);
}

/// The --endpoint flag, else the environment default.
inline std::string resolve_endpoint(const GuidanceFlags& f) {
  if (!f.endpoint.empty()) return f.endpoint;
  const char* env = std::getenv(kEndpointEnv);
  return env ? env : "";
}

/// Usage problems in the guidance flags, caught before any output is written.
inline std::optional<std::string> guidance_usage_error(const GuidanceFlags& f) {
  if (f.mode != "oracle" && f.mode != "remote") return "--guidance must be oracle or remote";
  if (f.mode == "remote" && resolve_endpoint(f).empty())
    return std::string("remote guidance needs --endpoint or ") + kEndpointEnv;
  return std::nullopt;
}

/// Oracle or remote guidance. Remote mode is health-checked before any work starts.
inline std::unique_ptr<guidance::Guidance> make_guidance(const GuidanceFlags& f, const trainer::TrainConfig& cfg) {
  if (f.mode == "oracle")
    return std::make_unique<guidance::SyntheticOracle>(guidance::two_tone_sphere(), geometry::default_intrinsics(),
                                                       512, trainer::reference_pose(cfg));
  require(f.mode == "remote", ErrorKind::kInvalidArgument, "--guidance must be oracle or remote");
  const std::string endpoint = resolve_endpoint(f);
  require(!endpoint.empty(), ErrorKind::kInvalidArgument,
          std::string("remote guidance needs --endpoint or ") + kEndpointEnv);
  guidance::RemoteOptions opt;
  opt.endpoint = endpoint;
  opt.timeout_seconds = f.timeout_seconds;
  auto client = std::make_unique<guidance::RemoteClient>(opt);
  client->health();
  return client;
}

inline void write_error(const fs::path& out, const std::string& stage, ErrorKind kind, const std::string& message) {
  io::write_file(out / "error.json",
                 nlohmann::json{{"stage", stage}, {"kind", to_string(kind)}, {"message", message}}.dump(2));
}

/// Runs `body`, mapping failures to exit codes and recording them in out/error.json.
template <typename Fn>
int guarded(const fs::path& out, std::ostream& err, Fn&& body) {
  auto report = [&](const std::string& stage, ErrorKind kind, const std::string& msg) {
    err << "error [" << stage << "/" << to_string(kind) << "]: " << msg << "\n";
    try {
      fs::create_directories(out);
      write_error(out, stage, kind, msg);
    } catch (const std::exception&) {
    }
    return exit_code_for(kind);
  };
  try {
    return body();
  } catch (const StageError& e) {
    return report(e.stage(), e.kind(), e.what());
  } catch (const Error& e) {
    return report("setup", e.kind(), e.what());
  } catch (const std::exception& e) {
    return report("internal", ErrorKind::kInvalidArgument, e.what());
  }
}

inline std::string frame_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%03d.png", k);
  return buf;
}

inline int cmd_run(const RunFlags& f, std::ostream& log = std::cerr) {
  const fs::path out = f.out;
  if (f.text.empty()) {
    log << "usage: --text is required\n";
    return kUsage;
  }
  if (!f.depth.empty() && f.image.empty()) {
    log << "usage: --depth needs --image\n";
    return kUsage;
  }
  if (const auto msg = guidance_usage_error(f.guidance)) {
    log << "usage: " << *msg << "\n";
    return kUsage;
  }
  trainer::TrainConfig cfg;
  try {
    cfg = load_config(f.config, f.scaled);
    if (f.seed) cfg.seed = *f.seed;
    cfg.validate();
  } catch (const Error& e) {
    log << "usage: " << e.what() << "\n";
    return kUsage;
  }

  return guarded(out, log, [&]() -> int {
    fs::create_directories(out);
    trainer::RunInputs in;
    in.text = f.text;
    in.depth_is_metric = f.metric_depth;
    nlohmann::json inputs = {{"text", hex64(io::fnv1a(f.text))}};
    trainer::in_stage("inputs", [&] {
      if (!f.image.empty()) {
        in.image = io::read_png(f.image);
        inputs["image"] = file_hash(f.image);
      }
      if (!f.depth.empty()) {
        in.depth = read_depth(f.depth);
        inputs["depth"] = file_hash(f.depth);
      }
      if (!f.config.empty()) inputs["config"] = file_hash(f.config);
    });
    auto g = trainer::in_stage("guidance", [&] { return make_guidance(f.guidance, cfg); });

    nlohmann::json frames = nlohmann::json::array();
    for (int k = 0; k < cfg.orbit_frames; ++k) frames.push_back("frames/" + frame_name(k));
    const nlohmann::json manifest = {
        {"config", trainer::to_json(cfg)},
        {"inputs", inputs},
        {"guidance", g->mode()},
        {"outputs",
         {{"report", "report.json"}, {"checkpoint", "checkpoint.bin"}, {"frames", frames}, {"error", "error.json"}}},
        {"build", DITTO_BUILD_ID},
        {"seed", cfg.seed}};
    io::write_file(out / "manifest.json", manifest.dump(2));

    trainer::RunHooks hooks;
    if (!f.quiet)
      hooks.on_step = [&](const trainer::LossBreakdown& b) {
        if (b.iteration % cfg.eval_every == 0 || b.iteration == cfg.t_total)
          log << "iter " << b.iteration << "/" << cfg.t_total << " side " << b.side << " l_R " << b.l_R << " l_sp "
              << b.l_sp << "\n";
      };
    const auto result = trainer::run(cfg, in, *g, hooks);

    trainer::in_stage("export", [&] {
      latentfield::save_checkpoint(out / "checkpoint.bin", result.field, cfg.t_total);
      for (std::size_t k = 0; k < result.frames.size(); ++k)
        io::write_png(out / "frames" / frame_name(static_cast<int>(k)), result.frames[k]);
      io::write_file(out / "report.json", trainer::run_report(cfg, result).dump(2));
    });
    if (!f.quiet) log << "wrote " << out.string() << " in " << result.seconds << " s\n";
    return kOk;
  });
}

inline int cmd_scaffold(const ScaffoldFlags& f, std::ostream& log = std::cerr) {
  const fs::path out = f.out;
  if (f.image.empty() || f.depth.empty()) {
    log << "usage: scaffold needs --image and --depth\n";
    return kUsage;
  }
  if (const auto msg = guidance_usage_error(f.guidance)) {
    log << "usage: " << *msg << "\n";
    return kUsage;
  }
  trainer::TrainConfig cfg;
  try {
    cfg = load_config(f.config, f.scaled);
    cfg.n_prerender = f.views;
    cfg.validate();
  } catch (const Error& e) {
    log << "usage: " << e.what() << "\n";
    return kUsage;
  }
  return guarded(out, log, [&]() -> int {
    fs::create_directories(out);
    geometry::RgbdImage rgbd;
    trainer::in_stage("inputs", [&] {
      rgbd.rgb = io::read_png(f.image);
      rgbd.depth = read_depth(f.depth);
      rgbd.validate();
    });
    auto g = trainer::in_stage("guidance", [&] { return make_guidance(f.guidance, cfg); });
    const auto mesh = trainer::in_stage("geometry", [&] {
      auto m = prerender::build_scaffold(rgbd, trainer::reference_pose(cfg),
                                         trainer::scaffold_options(cfg, f.metric_depth));
      require(!m.empty(), ErrorKind::kEmptyInput, "scaffold mesh is empty");
      return m;
    });
    const auto bank = trainer::in_stage("prerender", [&] { return trainer::build_bank(cfg, mesh, *g); });
    trainer::in_stage("export", [&] {
      geometry::write_ply(out / "scaffold.ply", mesh);
      prerender::save_view_bank(out / "views", bank);
    });
    log << "scaffold: " << mesh.vertices.size() << " vertices, " << mesh.faces.size() << " faces, "
        << bank.views.size() << " views\n";
    return kOk;
  });
}

inline void add_guidance_flags(CLI::App& cmd, GuidanceFlags& g) {
  cmd.add_option("--guidance", g.mode, "Guidance provider")->check(CLI::IsMember({"oracle", "remote"}));
  cmd.add_option("--endpoint", g.endpoint, std::string("Sidecar URL (default: $") + kEndpointEnv + ")");
  cmd.add_option("--timeout", g.timeout_seconds, "Per-request timeout in seconds");
}

/// Entry point shared by the binary and the tests.
inline int main(int argc, const char* const* argv, std::ostream& log = std::cerr) {
  CLI::App app{"Ditto: single-view to 3D with a latent radiance field"};
  app.require_subcommand(1);
  RunFlags run;
  ScaffoldFlags scaf;

  auto* r = app.add_subcommand("run", "Train a field from text, optionally with a reference image and depth");
  r->add_option("--text", run.text, "Text prompt");
  r->add_option("--image", run.image, "Reference RGB image (PNG)")->check(CLI::ExistingFile);
  r->add_option("--depth", run.depth, "Depth map for --image (tensor file or PNG)")->check(CLI::ExistingFile);
  r->add_flag("--metric-depth", run.metric_depth, "Depth is camera z in scene units");
  add_guidance_flags(*r, run.guidance);
  r->add_option("--config", run.config, "JSON config overlay")->check(CLI::ExistingFile);
  r->add_option("--out", run.out, "Output directory");
  r->add_option("--seed", run.seed, "Random seed");
  r->add_flag("--scaled", run.scaled, "Start from the desk-scale preset");
  r->add_flag("--quiet", run.quiet, "No progress output");

  auto* s = app.add_subcommand("scaffold", "Build the scaffold mesh and view bank only");
  s->add_option("--image", scaf.image, "Reference RGB image (PNG)")->check(CLI::ExistingFile);
  s->add_option("--depth", scaf.depth, "Depth map (tensor file or PNG)")->check(CLI::ExistingFile);
  s->add_flag("--metric-depth", scaf.metric_depth, "Depth is camera z in scene units");
  add_guidance_flags(*s, scaf.guidance);
  s->add_option("--config", scaf.config, "JSON config overlay")->check(CLI::ExistingFile);
  s->add_option("--views", scaf.views, "Number of pre-rendered views")->check(CLI::PositiveNumber);
  s->add_option("--out", scaf.out, "Output directory");
  s->add_flag("--scaled", scaf.scaled, "Start from the desk-scale preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    log << "usage: " << e.what() << "\n";
    return kUsage;
  }
  if (r->parsed()) return cmd_run(run, log);
  return cmd_scaffold(scaf, log);
}

}  // namespace ditto::cli
