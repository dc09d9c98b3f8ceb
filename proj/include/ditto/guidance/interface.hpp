// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ditto/core/tensor.hpp"
#include "ditto/prerender/codec.hpp"
#include "ditto/prerender/pose.hpp"

namespace ditto::guidance {

enum class RequestKind { kResidual, kGenerate, kDepth, kEncode, kDecode };

inline const char* to_string(RequestKind k) {
  switch (k) {
    case RequestKind::kResidual: return "residual";
    case RequestKind::kGenerate: return "generate";
    case RequestKind::kDepth: return "depth";
    case RequestKind::kEncode: return "encode";
    case RequestKind::kDecode: return "decode";
  }
  return "unknown";
}

struct GuidanceRequest {
  RequestKind kind = RequestKind::kResidual;
  Tensor payload;      // z for residual/decode, image for depth/encode
  Tensor mask;         // residual only: 1 x L x L, 1 = regenerate
  std::string prompt;  // residual/generate
  double tau = 0.5;    // residual only, in (0, 1)
  std::uint64_t seed = 0;
  int size = 512;      // generate only
  std::optional<prerender::CameraPose> pose;  // informational; used by the synthetic oracle

  void validate() const {
    switch (kind) {
      case RequestKind::kResidual:
        require(payload.channels() == prerender::kLatentChannels, ErrorKind::kShapeMismatch,
                "residual request needs a 4-channel latent");
        require(mask.channels() == 1 && mask.height() == payload.height() && mask.width() == payload.width(),
                ErrorKind::kShapeMismatch, "residual mask must be 1 x L x L");
        require(tau > 0.0 && tau < 1.0, ErrorKind::kInvalidArgument, "tau must lie in (0, 1)");
        break;
      case RequestKind::kGenerate:
        require(size > 0, ErrorKind::kInvalidArgument, "generate size must be positive");
        break;
      case RequestKind::kDepth:
      case RequestKind::kEncode:
        require(payload.channels() == 3, ErrorKind::kShapeMismatch, "image payload must have 3 channels");
        break;
      case RequestKind::kDecode:
        require(payload.channels() == prerender::kLatentChannels, ErrorKind::kShapeMismatch,
                "decode needs a 4-channel latent");
        break;
    }
  }
};

struct GuidanceResponse {
  RequestKind kind = RequestKind::kResidual;
  Tensor payload;
  std::string model;
  double wall_ms = 0.0;
};

/// Shape each response kind must have for a given request.
inline void validate_response(const GuidanceRequest& req, const GuidanceResponse& res) {
  const Tensor& p = res.payload;
  auto expect = [&](int c, int h, int w) {
    require(p.channels() == c && p.height() == h && p.width() == w, ErrorKind::kProtocol,
            std::string(to_string(req.kind)) + " response has dims [" + std::to_string(p.channels()) + "," +
                std::to_string(p.height()) + "," + std::to_string(p.width()) + "], expected [" + std::to_string(c) +
                "," + std::to_string(h) + "," + std::to_string(w) + "]");
  };
  const Tensor& q = req.payload;
  switch (req.kind) {
    case RequestKind::kResidual: expect(q.channels(), q.height(), q.width()); break;
    case RequestKind::kGenerate: expect(3, req.size, req.size); break;
    case RequestKind::kDepth: expect(1, q.height(), q.width()); break;
    case RequestKind::kEncode:
      expect(prerender::kLatentChannels, q.height() / prerender::kLatentFactor, q.width() / prerender::kLatentFactor);
      break;
    case RequestKind::kDecode:
      expect(3, q.height() * prerender::kLatentFactor, q.width() * prerender::kLatentFactor);
      break;
  }
  require(p.all_finite(), ErrorKind::kProtocol, std::string(to_string(req.kind)) + " response is not finite");
}

/// Diffusion / depth / codec provider. Implementations must be safe for concurrent calls.
class Guidance {
 public:
  virtual ~Guidance() = default;
  virtual GuidanceResponse call(const GuidanceRequest& req) = 0;
  virtual std::vector<std::string> health() = 0;
  /// "oracle" or "remote".
  virtual std::string mode() const = 0;
  /// True when depth responses are camera-space z in scene units rather than relative depth.
  virtual bool metric_depth() const { return false; }

  Tensor residual(const Tensor& z, const Tensor& mask, const std::string& prompt, double tau, std::uint64_t seed,
                  const std::optional<prerender::CameraPose>& pose = std::nullopt) {
    GuidanceRequest r{RequestKind::kResidual, z, mask, prompt, tau, seed, 512, pose};
    return call(r).payload;
  }
  Tensor generate(const std::string& prompt, std::uint64_t seed, int size = 512) {
    GuidanceRequest r;
    r.kind = RequestKind::kGenerate;
    r.prompt = prompt;
    r.seed = seed;
    r.size = size;
    return call(r).payload;
  }
  Tensor depth(const Tensor& image) {
    GuidanceRequest r;
    r.kind = RequestKind::kDepth;
    r.payload = image;
    return call(r).payload;
  }
  Tensor encode(const Tensor& image) {
    GuidanceRequest r;
    r.kind = RequestKind::kEncode;
    r.payload = image;
    return call(r).payload;
  }
  Tensor decode(const Tensor& z) {
    GuidanceRequest r;
    r.kind = RequestKind::kDecode;
    r.payload = z;
    return call(r).payload;
  }
};

/// Latent codec served by a guidance provider. Coverage is not part of the wire contract and is ignored.
class GuidanceCodec final : public prerender::LatentCodec {
 public:
  explicit GuidanceCodec(Guidance& g) : g_(g) {}
  Tensor encode(const Tensor& rgb, const Tensor&) const override { return g_.encode(rgb); }
  Tensor decode(const Tensor& latent) const override { return g_.decode(latent); }
  std::string name() const override { return g_.mode() + "-codec"; }

 private:
  Guidance& g_;
};

}  // namespace ditto::guidance
