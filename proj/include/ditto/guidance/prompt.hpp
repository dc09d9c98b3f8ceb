// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "ditto/core/error.hpp"
#include "ditto/prerender/pose.hpp"

namespace ditto::guidance {

enum class Direction { kNone, kFront, kSide, kBack, kOverhead };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::kNone: return "";
    case Direction::kFront: return "front";
    case Direction::kSide: return "side";
    case Direction::kBack: return "back";
    case Direction::kOverhead: return "overhead";
  }
  return "";
}

/// Direction text for a pose relative to the in-boundary center.
inline Direction direction_bucket(double theta, double phi, double center_theta) {
  if (phi > 60.0) return Direction::kOverhead;
  const double dev = std::abs(prerender::wrap_degrees(theta - center_theta + 180.0) - 180.0);
  if (dev < 45.0) return Direction::kFront;
  if (dev < 135.0) return Direction::kSide;
  return Direction::kBack;
}

inline constexpr const char* kReferencePrefix = "A whole photo of ";
inline constexpr const char* kReferenceSuffix = " in the white background taken with 50mm lens";

/// Reference prompts get the photo framing; training prompts get ", <direction> view".
inline std::string compose_prompt(const std::string& y, Direction direction, bool reference) {
  require(!y.empty(), ErrorKind::kInvalidArgument, "prompt text must not be empty");
  if (reference) return kReferencePrefix + y + kReferenceSuffix;
  if (direction == Direction::kNone) return y;
  return y + ", " + to_string(direction) + " view";
}

}  // namespace ditto::guidance
