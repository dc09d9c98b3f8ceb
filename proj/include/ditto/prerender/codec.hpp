// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ditto/core/tensor.hpp"

namespace ditto::prerender {

/// Image side / latent side.
inline constexpr int kLatentFactor = 8;
inline constexpr int kLatentChannels = 4;

/// Image <-> latent codec. encode maps 3 x S x S in [0,1] to 4 x S/8 x S/8;
/// decode maps 4 x L x L back to 3 x 8L x 8L.
class LatentCodec {
 public:
  virtual ~LatentCodec() = default;
  /// `coverage` is an optional 1 x S x S foreground mask; codecs may ignore it.
  virtual Tensor encode(const Tensor& rgb, const Tensor& coverage) const = 0;
  virtual Tensor decode(const Tensor& latent) const = 0;
  virtual std::string name() const = 0;
};

/// Bit-exact stand-in for a VAE: channels 0-2 are 8x area-pooled RGB mapped to
/// [-1,1], channel 3 is the pooled coverage mapped to [-1,1]. Decode is the
/// nearest-neighbour inverse of the RGB channels.
class StubCodec final : public LatentCodec {
 public:
  Tensor encode(const Tensor& rgb, const Tensor& coverage) const override {
    require(rgb.channels() == 3, ErrorKind::kShapeMismatch, "stub encode needs a 3-channel image");
    require(coverage.empty() || (coverage.channels() == 1 && coverage.height() == rgb.height() &&
                                 coverage.width() == rgb.width()),
            ErrorKind::kShapeMismatch, "coverage mask must match the image");
    const Tensor pooled = average_pool(rgb, kLatentFactor);
    Tensor z(kLatentChannels, pooled.height(), pooled.width(), -1.0);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < z.height(); ++y)
        for (int x = 0; x < z.width(); ++x) z(c, y, x) = 2.0 * pooled(c, y, x) - 1.0;
    if (!coverage.empty()) {
      const Tensor cov = average_pool(coverage, kLatentFactor);
      for (int y = 0; y < z.height(); ++y)
        for (int x = 0; x < z.width(); ++x) z(3, y, x) = 2.0 * cov(0, y, x) - 1.0;
    }
    return z;
  }

  Tensor decode(const Tensor& latent) const override {
    require(latent.channels() == kLatentChannels, ErrorKind::kShapeMismatch, "stub decode needs a 4-channel latent");
    Tensor rgb(3, latent.height(), latent.width());
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < latent.height(); ++y)
        for (int x = 0; x < latent.width(); ++x) rgb(c, y, x) = 0.5 * (latent(c, y, x) + 1.0);
    return upsample_nearest(rgb, kLatentFactor);
  }

  std::string name() const override { return "stub-pool8"; }
};

/// Latent of an empty white frame under the stub codec.
inline Tensor white_latent(int side) {
  Tensor z(kLatentChannels, side, side, 1.0);
  for (double& v : z.channel(3)) v = -1.0;
  return z;
}

/// Encodes a rendered view at latent side L, resampling when the codec's
/// native output side differs.
inline Tensor encode_view(const Tensor& rgb, const Tensor& mask, const LatentCodec& codec, int latent_side) {
  Tensor z = codec.encode(rgb, mask);
  require(z.channels() == kLatentChannels && z.all_finite(), ErrorKind::kProtocol, "codec returned a bad latent");
  if (z.height() != latent_side || z.width() != latent_side) z = resize_bilinear(z, latent_side, latent_side);
  return z;
}

/// Binary foreground mask at latent resolution: a latent pixel is foreground
/// when at least half of its image block is covered.
inline Tensor latent_mask(const Tensor& mask, int latent_side) {
  const int factor = mask.height() / latent_side;
  require(factor >= 1 && factor * latent_side == mask.height(), ErrorKind::kShapeMismatch,
          "mask side must be a multiple of the latent side");
  Tensor pooled = average_pool(mask, factor);
  for (double& v : pooled.data()) v = v >= 0.5 ? 1.0 : 0.0;
  return pooled;
}

}  // namespace ditto::prerender
