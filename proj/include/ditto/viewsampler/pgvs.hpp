// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "ditto/core/error.hpp"
#include "ditto/prerender/pose.hpp"

namespace ditto::viewsampler {

using prerender::AngleBox;

struct PgvsParams {
  double alpha0 = 2.0;
  double beta0 = 8.0;
  double t_u = 1500.0;
  double t_total = 5000.0;
  double ib_theta = 90.0;  // sampling center
  double ib_phi = 0.0;
  double theta_half_range = 180.0;  // global azimuth = center +- this
  double phi_min = -30.0;           // global elevation range
  double phi_max = 45.0;

  void validate() const {
    require(alpha0 > 0 && beta0 > 0, ErrorKind::kInvalidArgument, "alpha0 and beta0 must be positive");
    require(t_u > 0 && t_u <= t_total, ErrorKind::kInvalidArgument, "need 0 < t_u <= t_total");
    require(theta_half_range > 0 && phi_max > phi_min, ErrorKind::kInvalidArgument, "degenerate global range");
    require(ib_phi >= phi_min && ib_phi <= phi_max, ErrorKind::kInvalidArgument,
            "sampling center outside the global elevation range");
  }
};

/// Beta parameters at iteration t; (1, 1) from t_u on.
inline std::pair<double, double> alpha_beta(double t, const PgvsParams& p) {
  if (t >= p.t_u) return {1.0, 1.0};
  return {p.alpha0 + 1.0 - p.alpha0 / p.t_u * t, p.beta0 + 1.0 - p.beta0 / p.t_u * t};
}

inline double beta_pdf(double x, double a, double b) {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (a == 1.0 && b == 1.0) return 1.0;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  // pow(0, 0) == 1 covers the a == 1 or b == 1 endpoints.
  return std::exp(log_norm) * std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0);
}

inline double pgvs_pdf(double x, double t, const PgvsParams& p) {
  const auto [a, b] = alpha_beta(t, p);
  return beta_pdf(x, a, b);
}

/// CDF of a density on [0, 1] tabulated with composite Simpson over a fixed
/// number of intervals; evaluation and inversion refine within one panel.
class TabulatedCdf {
 public:
  static constexpr int kIntervals = 256;

  explicit TabulatedCdf(std::function<double(double)> pdf) : pdf_(std::move(pdf)) {
    nodes_.resize(kPanels + 1, 0.0);
    for (int k = 0; k < kPanels; ++k) nodes_[k + 1] = nodes_[k] + simpson(k * kPanelWidth, (k + 1) * kPanelWidth);
  }

  /// Integral of the pdf over [0, 1].
  double total() const { return nodes_.back(); }

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return total();
    const int k = std::min(kPanels - 1, static_cast<int>(x / kPanelWidth));
    return nodes_[k] + simpson(k * kPanelWidth, x);
  }

  /// Smallest x with cdf(x) >= u, by bisection to 1e-8.
  double inverse(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= total()) return 1.0;
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
    const int k = static_cast<int>(it - nodes_.begin()) - 1;
    double lo = k * kPanelWidth, hi = std::min(1.0, (k + 1) * kPanelWidth);
    while (hi - lo > 1e-8) {
      const double mid = 0.5 * (lo + hi);
      (nodes_[k] + simpson(k * kPanelWidth, mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  // Each panel is two Simpson intervals.
  static constexpr int kPanels = kIntervals / 2;
  static constexpr double kPanelWidth = 1.0 / kPanels;

  double simpson(double a, double b) const {
    return (b - a) / 6.0 * (pdf_(a) + 4.0 * pdf_(0.5 * (a + b)) + pdf_(b));
  }

  std::function<double(double)> pdf_;
  std::vector<double> nodes_;
};

/// Deviation-fraction distribution of one sampler at one iteration.
inline TabulatedCdf pgvs_distribution(double t, const PgvsParams& p) {
  const auto [a, b] = alpha_beta(t, p);
  return TabulatedCdf([a, b](double x) { return beta_pdf(x, a, b); });
}

/// Probability of sampling above the center on each axis, proportional to the
/// room on that side so that the uniform branch covers the global range uniformly.
inline double theta_positive_probability(const PgvsParams&) { return 0.5; }
inline double phi_positive_probability(const PgvsParams& p) {
  return (p.phi_max - p.ib_phi) / (p.phi_max - p.phi_min);
}

/// Maps per-axis deviation fractions and sign draws to angles: center +- x * (room on that side).
/// Sign draws are uniforms in (0, 1); the positive side is taken when the draw
/// falls below the axis' positive probability.
inline std::pair<double, double> map_deviation(double x_theta, double x_phi, double s_theta, double s_phi,
                                               const PgvsParams& p) {
  const double theta = s_theta < theta_positive_probability(p) ? p.ib_theta + x_theta * p.theta_half_range
                                                                : p.ib_theta - x_theta * p.theta_half_range;
  double phi = s_phi < phi_positive_probability(p) ? p.ib_phi + x_phi * (p.phi_max - p.ib_phi)
                                                   : p.ib_phi - x_phi * (p.ib_phi - p.phi_min);
  phi = std::clamp(phi, p.phi_min, p.phi_max);
  return {prerender::wrap_degrees(theta), phi};
}

/// Samples (theta, phi) at iteration t from uniforms u_* (inverse-CDF draws) and s_* (sign draws).
inline std::pair<double, double> pgvs_sample(const TabulatedCdf& dist, const PgvsParams& p, double u_theta,
                                             double u_phi, double s_theta, double s_phi) {
  return map_deviation(dist.inverse(u_theta), dist.inverse(u_phi), s_theta, s_phi, p);
}

inline std::pair<double, double> pgvs_sample(double t, const PgvsParams& p, double u_theta, double u_phi,
                                             double s_theta, double s_phi) {
  return pgvs_sample(pgvs_distribution(t, p), p, u_theta, u_phi, s_theta, s_phi);
}

inline bool is_ib(double theta, double phi, const AngleBox& box) { return box.contains(theta, phi); }

/// Ablation sampler: alpha moves alpha0+1 -> beta0+1 and beta the reverse over [0, t_u]; uniform after.
inline std::pair<double, double> moving_alpha_beta(double t, const PgvsParams& p) {
  if (t >= p.t_u) return {1.0, 1.0};
  const double s = t / p.t_u;
  return {p.alpha0 + 1.0 + (p.beta0 - p.alpha0) * s, p.beta0 + 1.0 - (p.beta0 - p.alpha0) * s};
}

inline TabulatedCdf moving_beta_distribution(double t, const PgvsParams& p) {
  const auto [a, b] = moving_alpha_beta(t, p);
  return TabulatedCdf([a, b](double x) { return beta_pdf(x, a, b); });
}

inline std::pair<double, double> moving_beta_sample(double t, const PgvsParams& p, double u_theta, double u_phi,
                                                    double s_theta, double s_phi) {
  return pgvs_sample(moving_beta_distribution(t, p), p, u_theta, u_phi, s_theta, s_phi);
}

/// Ablation sampler over n equal intervals of the deviation fraction: the
/// active interval holds mass r, the rest share 1 - r. The active interval
/// steps outward with t and the sampler is uniform from t_u on.
struct DiscreteAccumulation {
  double r = 0.65;
  int n_intervals = 6;

  void validate() const {
    require(r > 0.0 && r < 1.0, ErrorKind::kInvalidArgument, "r must lie in (0, 1)");
    require(n_intervals >= 2, ErrorKind::kInvalidArgument, "need at least two intervals");
  }

  /// Index of the interval carrying mass r at iteration t, or -1 once uniform.
  int active_interval(double t, const PgvsParams& p) const {
    if (t >= p.t_u) return -1;
    return std::min(n_intervals - 1, static_cast<int>(std::floor(n_intervals * t / p.t_u)));
  }

  double mass(int interval, double t, const PgvsParams& p) const {
    const int active = active_interval(t, p);
    if (active < 0) return 1.0 / n_intervals;
    return interval == active ? r : (1.0 - r) / (n_intervals - 1);
  }

  /// Exact inverse of the piecewise-constant CDF.
  double inverse(double u, double t, const PgvsParams& p) const {
    validate();
    const double width = 1.0 / n_intervals;
    double acc = 0.0;
    for (int k = 0; k < n_intervals; ++k) {
      const double m = mass(k, t, p);
      if (u < acc + m || k == n_intervals - 1) return std::clamp(k * width + (u - acc) / m * width, 0.0, 1.0);
      acc += m;
    }
    return 1.0;
  }
};

inline std::pair<double, double> discrete_accum_sample(double t, const PgvsParams& p, const DiscreteAccumulation& d,
                                                       double u_theta, double u_phi, double s_theta, double s_phi) {
  return map_deviation(d.inverse(u_theta, t, p), d.inverse(u_phi, t, p), s_theta, s_phi, p);
}

}  // namespace ditto::viewsampler
