// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

#include "ditto/geometry/camera.hpp"

namespace ditto::prerender {

using geometry::Vec3;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;

/// Wraps an azimuth into [0, 360).
inline double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w >= 360.0 ? 0.0 : w;
}

/// Closed azimuth/elevation box in degrees.
struct AngleBox {
  double theta_min = 60.0;
  double theta_max = 120.0;
  double phi_min = -30.0;
  double phi_max = 30.0;

  bool contains(double theta, double phi) const {
    return theta >= theta_min && theta <= theta_max && phi >= phi_min && phi <= phi_max;
  }
  double theta_center() const { return 0.5 * (theta_min + theta_max); }
  double phi_center() const { return 0.5 * (phi_min + phi_max); }
};

/// Orbit camera: azimuth theta and elevation phi in degrees around look_at.
/// World +Z is up; theta = 90, phi = 0 places the camera on the +Y axis.
struct CameraPose {
  double theta = 90.0;
  double phi = 0.0;
  double radius = 3.0;
  Vec3 look_at = Vec3::Zero();

  void validate() const {
    require(radius > 0.0 && std::isfinite(radius), ErrorKind::kInvalidArgument, "pose radius must be positive");
    require(phi >= -90.0 && phi <= 90.0, ErrorKind::kInvalidArgument, "pose elevation outside [-90, 90]");
  }

  CameraPose normalized() const {
    CameraPose p = *this;
    p.theta = wrap_degrees(theta);
    return p;
  }

  Vec3 direction() const {
    const double t = theta * kDegToRad, f = phi * kDegToRad;
    return {std::cos(f) * std::cos(t), std::cos(f) * std::sin(t), std::sin(f)};
  }

  Vec3 position() const { return look_at + radius * direction(); }

  geometry::CameraFrame frame() const { return geometry::look_at(position(), look_at); }

  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

/// Great-circle angle in degrees between two viewing directions.
inline double great_circle_degrees(double theta_a, double phi_a, double theta_b, double phi_b) {
  const CameraPose a{theta_a, phi_a}, b{theta_b, phi_b};
  const Vec3 da = a.direction(), db = b.direction();
  return std::atan2(da.cross(db).norm(), da.dot(db)) / kDegToRad;
}

}  // namespace ditto::prerender
