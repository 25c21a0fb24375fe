// Copyright 2026 The planprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "planprobe/errors.hpp"
#include "planprobe/geometry.hpp"

namespace planprobe {

/// Canonical tick used wherever a sampling rate is not configured (10 Hz).
inline constexpr double kCanonicalTickS = 0.1;

struct TimedPose {
  double t{0.0};
  Pose2D pose;

  bool operator==(const TimedPose &) const = default;
};

struct Trajectory {
  std::vector<TimedPose> points;
  double dt{kCanonicalTickS};  // nominal sampling period

  bool empty() const { return points.empty(); }
  size_t size() const { return points.size(); }
  const TimedPose & front() const { return points.front(); }
  const TimedPose & back() const { return points.back(); }
  double span() const { return points.back().t - points.front().t; }

  void validate(const std::string & what = "trajectory") const
  {
    if (points.empty()) {
      throw ValidationError(what + ": must be non-empty");
    }
    for (size_t i = 0; i < points.size(); ++i) {
      const TimedPose & p = points[i];
      if (!std::isfinite(p.t) || !std::isfinite(p.pose.x) || !std::isfinite(p.pose.y) ||
          !std::isfinite(p.pose.heading)) {
        throw ValidationError(what + ": non-finite value at point " + std::to_string(i));
      }
      if (i > 0 && p.t <= points[i - 1].t) {
        throw ValidationError(
          what + ": timestamps must be strictly increasing (point " + std::to_string(i) + ")");
      }
    }
  }

  /// Pose at time t by linear position interpolation and shortest-arc heading
  /// interpolation; clamps to the endpoints outside the span.
  Pose2D sample_at(double t) const
  {
    if (t <= points.front().t) {
      return points.front().pose;
    }
    if (t >= points.back().t) {
      return points.back().pose;
    }
    const auto it = std::lower_bound(
      points.begin(), points.end(), t,
      [](const TimedPose & p, double value) { return p.t < value; });
    const size_t hi = static_cast<size_t>(it - points.begin());
    const TimedPose & b = points[hi];
    if (std::abs(b.t - t) < 1e-12) {
      return b.pose;
    }
    const TimedPose & a = points[hi - 1];
    if (std::abs(a.t - t) < 1e-12) {
      return a.pose;
    }
    const double u = (t - a.t) / (b.t - a.t);
    Pose2D out;
    out.x = a.pose.x * (1.0 - u) + b.pose.x * u;
    out.y = a.pose.y * (1.0 - u) + b.pose.y * u;
    out.heading = interpolate_heading(a.pose.heading, b.pose.heading, u);
    return out;
  }

  bool operator==(const Trajectory &) const = default;
};

/// Infers a nominal sampling period from the points (median gap); falls back
/// to the canonical tick for single-point trajectories.
inline double infer_dt(const std::vector<TimedPose> & points)
{
  if (points.size() < 2) {
    return kCanonicalTickS;
  }
  std::vector<double> gaps;
  gaps.reserve(points.size() - 1);
  for (size_t i = 1; i < points.size(); ++i) {
    gaps.push_back(points[i].t - points[i - 1].t);
  }
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2];
}

/// Resamples onto the uniform grid t_start + k*dt inside the input span.
inline Trajectory resample(const Trajectory & traj, double dt)
{
  if (dt <= 0.0) {
    throw ValidationError("resample: dt must be positive");
  }
  traj.validate("resample input");
  const double t_start = traj.front().t;
  const double span = traj.span();
  if (span + 1e-9 < dt) {
    throw ValidationError("resample: trajectory span is shorter than dt");
  }
  const auto steps = static_cast<size_t>(std::floor(span / dt + 1e-9));
  Trajectory out;
  out.dt = dt;
  out.points.reserve(steps + 1);
  for (size_t k = 0; k <= steps; ++k) {
    const double t = t_start + static_cast<double>(k) * dt;
    out.points.push_back({t, traj.sample_at(t)});
  }
  return out;
}

}  // namespace planprobe
