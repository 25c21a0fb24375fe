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
#include <vector>

#include "planprobe/errors.hpp"
#include "planprobe/geometry.hpp"
#include "planprobe/trajectory.hpp"

namespace planprobe {

// Scenario-level gates applied to the metric means.
inline constexpr double kMissRateGate = 0.30;
inline constexpr double kDisplacementGateM = 8.0;
inline constexpr double kHeadingGateRad = 0.8;

struct Horizon {
  double seconds{3.0};
  double miss_threshold{6.0};  // meters
};

/// The three scoring horizons and their miss thresholds: 2.0 m at 1 s,
/// 3.2 m at 2 s, 6.0 m at 3 s.
inline Horizon make_horizon(double seconds)
{
  if (seconds == 1.0) return {1.0, 2.0};
  if (seconds == 2.0) return {2.0, 3.2};
  if (seconds == 3.0) return {3.0, 6.0};
  throw ConfigError("horizon must be 1, 2, or 3 seconds");
}

struct OpenLoopBreakdown {
  double ade{0.0};
  double fde{0.0};
  double ahe{0.0};
  double fhe{0.0};
  double miss_rate{0.0};
  int s_ade{1};
  int s_fde{1};
  int s_ahe{1};
  int s_fhe{1};
  int s_miss_rate{1};
  double composite{0.0};  // in [0, 100]
};

namespace openloop_detail {

inline void check_aligned(const Trajectory & plan, const Trajectory & expert)
{
  if (plan.size() != expert.size()) {
    throw ValidationError("open-loop metrics: mismatched timestamps (different point counts)");
  }
  if (plan.empty()) {
    throw ValidationError("open-loop metrics: empty trajectories");
  }
  for (size_t i = 0; i < plan.size(); ++i) {
    if (std::abs(plan.points[i].t - expert.points[i].t) > 1e-9) {
      throw ValidationError("open-loop metrics: mismatched timestamps");
    }
  }
}

/// Index of the last point inside the window [t_anchor, t_anchor + horizon];
/// throws when the trajectory ends before the horizon does.
inline size_t window_end(const Trajectory & traj, size_t anchor, double horizon_s)
{
  const double t_end = traj.points[anchor].t + horizon_s;
  if (traj.points.back().t + 1e-9 < t_end) {
    throw ValidationError("open-loop metrics: horizon exceeds trajectory span");
  }
  size_t end = anchor;
  while (end + 1 < traj.size() && traj.points[end + 1].t <= t_end + 1e-9) {
    ++end;
  }
  return end;
}

inline double point_distance(const Trajectory & plan, const Trajectory & expert, size_t i)
{
  return (plan.points[i].pose.position() - expert.points[i].pose.position()).norm();
}

inline double window_ade(const Trajectory & plan, const Trajectory & expert, size_t anchor,
                         size_t end)
{
  double sum = 0.0;
  for (size_t i = anchor; i <= end; ++i) {
    sum += point_distance(plan, expert, i);
  }
  return sum / static_cast<double>(end - anchor + 1);
}

inline double window_max_distance(const Trajectory & plan, const Trajectory & expert,
                                  size_t anchor, size_t end)
{
  double max_d = 0.0;
  for (size_t i = anchor; i <= end; ++i) {
    max_d = std::max(max_d, point_distance(plan, expert, i));
  }
  return max_d;
}

inline double window_ahe(const Trajectory & plan, const Trajectory & expert, size_t anchor,
                         size_t end)
{
  double sum = 0.0;
  for (size_t i = anchor; i <= end; ++i) {
    sum += heading_distance(plan.points[i].pose.heading, expert.points[i].pose.heading);
  }
  return sum / static_cast<double>(end - anchor + 1);
}

}  // namespace openloop_detail

/// Mean pointwise L2 distance over the horizon window opened at the first
/// common timestamp.
inline double ade(const Trajectory & plan, const Trajectory & expert, const Horizon & horizon)
{
  openloop_detail::check_aligned(plan, expert);
  const size_t end = openloop_detail::window_end(plan, 0, horizon.seconds);
  return openloop_detail::window_ade(plan, expert, 0, end);
}

/// L2 distance at the end of the horizon window.
inline double fde(const Trajectory & plan, const Trajectory & expert, const Horizon & horizon)
{
  openloop_detail::check_aligned(plan, expert);
  const size_t end = openloop_detail::window_end(plan, 0, horizon.seconds);
  return openloop_detail::point_distance(plan, expert, end);
}

/// Mean and final wrapped absolute heading difference over the window, each
/// in [0, pi].
inline std::pair<double, double> heading_errors(const Trajectory & plan, const Trajectory & expert,
                                                const Horizon & horizon)
{
  openloop_detail::check_aligned(plan, expert);
  const size_t end = openloop_detail::window_end(plan, 0, horizon.seconds);
  const double ahe = openloop_detail::window_ahe(plan, expert, 0, end);
  const double fhe =
    heading_distance(plan.points[end].pose.heading, expert.points[end].pose.heading);
  return {ahe, fhe};
}

/// Fraction of decision timesteps whose horizon window has a maximum
/// pointwise distance strictly above the miss threshold. Every timestep with
/// a full window ahead of it opens one window.
inline double miss_rate(const Trajectory & plan, const Trajectory & expert, const Horizon & horizon)
{
  openloop_detail::check_aligned(plan, expert);
  size_t misses = 0;
  size_t windows = 0;
  for (size_t anchor = 0; anchor < plan.size(); ++anchor) {
    if (plan.points.back().t + 1e-9 < plan.points[anchor].t + horizon.seconds) {
      break;
    }
    const size_t end = openloop_detail::window_end(plan, anchor, horizon.seconds);
    ++windows;
    if (openloop_detail::window_max_distance(plan, expert, anchor, end) >
        horizon.miss_threshold) {
      ++misses;
    }
  }
  if (windows == 0) {
    throw ValidationError("open-loop metrics: horizon exceeds trajectory span");
  }
  return static_cast<double>(misses) / static_cast<double>(windows);
}

/// Applies the scenario-level gates to the metric means and composes the
/// final score: (2*S_ADE + 2*S_FDE + S_AHE + S_FHE)/6 * S_MissRate * 100.
inline OpenLoopBreakdown openloop_score(double mean_ade, double mean_fde, double mean_ahe,
                                        double mean_fhe, double scenario_miss_rate)
{
  const double values[] = {mean_ade, mean_fde, mean_ahe, mean_fhe, scenario_miss_rate};
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("openloop_score: metric means must be finite and non-negative");
    }
  }
  OpenLoopBreakdown out;
  out.ade = mean_ade;
  out.fde = mean_fde;
  out.ahe = mean_ahe;
  out.fhe = mean_fhe;
  out.miss_rate = scenario_miss_rate;
  out.s_ade = mean_ade > kDisplacementGateM ? 0 : 1;
  out.s_fde = mean_fde > kDisplacementGateM ? 0 : 1;
  out.s_ahe = mean_ahe > kHeadingGateRad ? 0 : 1;
  out.s_fhe = mean_fhe > kHeadingGateRad ? 0 : 1;
  out.s_miss_rate = scenario_miss_rate > kMissRateGate ? 0 : 1;
  out.composite = (2.0 * out.s_ade + 2.0 * out.s_fde + out.s_ahe + out.s_fhe) / 6.0 *
                  out.s_miss_rate * 100.0;
  return out;
}

/// Aligns a plan and the expert future on the tick grid anchored at the
/// decision time t0 (sharing the current pose as the common origin), slides
/// the horizon window over every decision timestep, and gates the means.
inline OpenLoopBreakdown score_open_loop_scenario(const Trajectory & plan,
                                                  const Trajectory & expert, const Pose2D & anchor,
                                                  double t0, const Horizon & horizon,
                                                  double tick = kCanonicalTickS)
{
  plan.validate("plan");
  expert.validate("expert");
  const auto anchored = [&](const Trajectory & traj) {
    Trajectory out = traj;
    if (out.front().t > t0 + 1e-9) {
      out.points.insert(out.points.begin(), {t0, anchor});
    }
    return out;
  };
  const Trajectory plan_a = anchored(plan);
  const Trajectory expert_a = anchored(expert);
  const double t_end = std::min(plan_a.back().t, expert_a.back().t);
  const auto steps = static_cast<size_t>(std::floor((t_end - t0) / tick + 1e-9));
  if (steps == 0) {
    throw ValidationError("open-loop scoring: no common span after the decision time");
  }
  Trajectory plan_g;
  Trajectory expert_g;
  plan_g.dt = tick;
  expert_g.dt = tick;
  for (size_t k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * tick;
    plan_g.points.push_back({t, plan_a.sample_at(t)});
    expert_g.points.push_back({t, expert_a.sample_at(t)});
  }

  const size_t w = openloop_detail::window_end(plan_g, 0, horizon.seconds);
  double sum_ade = 0.0;
  double sum_fde = 0.0;
  double sum_ahe = 0.0;
  double sum_fhe = 0.0;
  size_t misses = 0;
  size_t windows = 0;
  for (size_t anchor_i = 0; anchor_i + w < plan_g.size(); ++anchor_i) {
    const size_t end = anchor_i + w;
    sum_ade += openloop_detail::window_ade(plan_g, expert_g, anchor_i, end);
    sum_fde += openloop_detail::point_distance(plan_g, expert_g, end);
    sum_ahe += openloop_detail::window_ahe(plan_g, expert_g, anchor_i, end);
    sum_fhe +=
      heading_distance(plan_g.points[end].pose.heading, expert_g.points[end].pose.heading);
    if (openloop_detail::window_max_distance(plan_g, expert_g, anchor_i, end) >
        horizon.miss_threshold) {
      ++misses;
    }
    ++windows;
  }
  const auto n = static_cast<double>(windows);
  return openloop_score(sum_ade / n, sum_fde / n, sum_ahe / n, sum_fhe / n,
                        static_cast<double>(misses) / n);
}

}  // namespace planprobe
