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
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "planprobe/agents.hpp"
#include "planprobe/errors.hpp"
#include "planprobe/geometry.hpp"
#include "planprobe/scenario.hpp"
#include "planprobe/trajectory.hpp"

namespace planprobe {

inline constexpr double kDrivableToleranceM = 0.3;
inline constexpr double kProgressGateThreshold = 0.2;
inline constexpr double kProgressFloorM = 0.1;
inline constexpr double kSpeedViolationThresholdMps = 2.23;
inline constexpr double kTtcThresholdS = 0.95;
inline constexpr double kWrongWayCompliantM = 2.0;
inline constexpr double kWrongWayViolationM = 6.0;
inline constexpr double kLaneSearchRadiusM = 10.0;

struct ComfortBounds {
  double lon_accel_min{-4.05};  // m/s^2
  double lon_accel_max{2.40};   // m/s^2
  double lat_accel_abs{4.89};   // m/s^2
  double yaw_rate_abs{0.95};    // rad/s
  double yaw_accel_abs{1.93};   // rad/s^2
  double lon_jerk_abs{4.13};    // m/s^3
  double jerk_abs{8.37};        // m/s^3
};

struct ReplayConfig {
  double tick_s{kCanonicalTickS};
  double replan_period_s{1.0};
  double ttc_horizon_s{3.0};
  double ttc_step_s{0.1};
  double agent_timeout_s{30.0};
  double plan_horizon_s{3.0};
  double ego_half_length_m{2.3};
  double ego_half_width_m{1.0};
  double at_fault_speed_mps{0.1};
  double history_window_s{2.0};
  std::vector<std::string> ablation_flags;
  bool include_scene{true};
  ComfortBounds comfort;

  void validate() const
  {
    if (tick_s <= 0.0 || replan_period_s <= 0.0 || ttc_step_s <= 0.0) {
      throw ConfigError("replay config: periods must be positive");
    }
    if (plan_horizon_s + 1e-9 < replan_period_s) {
      throw ConfigError("replay config: plan horizon shorter than the replan period");
    }
    if (ego_half_length_m <= 0.0 || ego_half_width_m <= 0.0) {
      throw ConfigError("replay config: ego half-dimensions must be positive");
    }
  }
};

struct TickDerivatives {
  double lon_accel{0.0};
  double lat_accel{0.0};
  double yaw_rate{0.0};
  double yaw_accel{0.0};
  double lon_jerk{0.0};
  double jerk_magnitude{0.0};
};

struct Rollout {
  Trajectory ego_track;  // simulated, at the replay tick
  std::vector<std::pair<double, Trajectory>> replan_log;
  std::vector<Vec2> ego_velocity;            // one per tick
  std::vector<TickDerivatives> derivatives;  // one per tick
  bool aborted{false};
  std::string error_tag;
  std::string error_detail;
};

/// Fills per-tick velocities and motion derivatives from the ego track by
/// finite differences (tail samples repeat the last computed value).
inline void compute_rollout_dynamics(Rollout & rollout)
{
  const auto & pts = rollout.ego_track.points;
  const size_t n = pts.size();
  rollout.ego_velocity.assign(n, {0.0, 0.0});
  rollout.derivatives.assign(n, {});
  if (n < 2) {
    return;
  }
  const double dt = pts[1].t - pts[0].t;

  // Each differencing stage is real over one fewer sample; tails repeat the
  // last real value so they never difference into padded data.
  std::vector<Vec2> vel(n);
  std::vector<double> yaw_rate(n, 0.0);
  for (size_t k = 0; k + 1 < n; ++k) {
    vel[k] = (pts[k + 1].pose.position() - pts[k].pose.position()) / dt;
    yaw_rate[k] = wrap_angle(pts[k + 1].pose.heading - pts[k].pose.heading) / dt;
  }
  vel[n - 1] = vel[n - 2];
  yaw_rate[n - 1] = yaw_rate[n - 2];

  std::vector<Vec2> acc(n, {0.0, 0.0});
  std::vector<double> yaw_acc(n, 0.0);
  if (n >= 3) {
    for (size_t k = 0; k + 2 < n; ++k) {
      acc[k] = (vel[k + 1] - vel[k]) / dt;
      yaw_acc[k] = (yaw_rate[k + 1] - yaw_rate[k]) / dt;
    }
    for (size_t k = n - 2; k < n; ++k) {
      acc[k] = acc[n - 3];
      yaw_acc[k] = yaw_acc[n - 3];
    }
  }

  std::vector<Vec2> jerk(n, {0.0, 0.0});
  if (n >= 4) {
    for (size_t k = 0; k + 3 < n; ++k) {
      jerk[k] = (acc[k + 1] - acc[k]) / dt;
    }
    for (size_t k = n - 3; k < n; ++k) {
      jerk[k] = jerk[n - 4];
    }
  }

  rollout.ego_velocity = vel;
  std::vector<double> lon_acc(n, 0.0);
  for (size_t k = 0; k < n; ++k) {
    TickDerivatives d;
    lon_acc[k] = acc[k].dot(pts[k].pose.direction());
    d.lon_accel = lon_acc[k];
    d.lat_accel = acc[k].dot(pts[k].pose.left());
    d.yaw_rate = yaw_rate[k];
    d.yaw_accel = yaw_acc[k];
    d.jerk_magnitude = jerk[k].norm();
    rollout.derivatives[k] = d;
  }
  if (n >= 4) {
    for (size_t k = 0; k + 3 < n; ++k) {
      rollout.derivatives[k].lon_jerk = (lon_acc[k + 1] - lon_acc[k]) / dt;
    }
    for (size_t k = n - 3; k < n; ++k) {
      rollout.derivatives[k].lon_jerk = rollout.derivatives[n - 4].lon_jerk;
    }
  }
}

/// Non-reactive replay: the ego tracks the latest plan exactly at the tick,
/// the agent is re-queried every replan period, and every other object
/// replays its log unchanged. Agent failures abort the rollout.
inline Rollout run_replay(const ScenarioRecord & scenario, Agent & agent, const ReplayConfig & cfg)
{
  cfg.validate();
  const double t0 = scenario.t0();
  const double t_end = scenario.end_time();
  const double dt = cfg.tick_s;
  const auto n_ticks = static_cast<size_t>(std::floor((t_end - t0) / dt + 1e-9));

  Rollout rollout;
  rollout.ego_track.dt = dt;
  Trajectory tracking;  // active plan, prepended with the pose at its replan tick
  double next_replan = t0;

  for (size_t k = 0; k <= n_ticks; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    Pose2D pose = k == 0 ? scenario.ego_state.pose : tracking.sample_at(t);
    rollout.ego_track.points.push_back({t, pose});

    const bool due = t + 1e-9 >= next_replan;
    const double remaining = t_end - t;
    if (!due || remaining <= 1e-9) {
      continue;
    }
    next_replan += cfg.replan_period_s;

    PlanRequest request;
    request.scenario_id = scenario.id;
    request.tick_t = t;
    request.horizon_s = std::min(cfg.plan_horizon_s, remaining);
    request.dt_s = dt;
    request.prior_ablation_flags = cfg.ablation_flags;
    if (!request.ablated("no_ego")) {
      EgoState now;
      now.pose = pose;
      now.t = t;
      if (k == 0) {
        now.velocity = scenario.ego_state.velocity;
        now.acceleration = scenario.ego_state.acceleration;
      } else {
        const auto & pts = rollout.ego_track.points;
        now.velocity = (pts[k].pose.position() - pts[k - 1].pose.position()) / dt;
        if (k >= 2) {
          const Vec2 prev_v = (pts[k - 1].pose.position() - pts[k - 2].pose.position()) / dt;
          now.acceleration = (now.velocity - prev_v) / dt;
        }
      }
      request.ego_state = now;
    }
    if (!request.ablated("no_history")) {
      Trajectory history;
      history.dt = dt;
      for (const TimedPose & p : scenario.ego_history.points) {
        if (p.t >= t - cfg.history_window_s - 1e-9 && p.t < t0 - 1e-12) {
          history.points.push_back(p);
        }
      }
      for (const TimedPose & p : rollout.ego_track.points) {
        if (p.t >= t - cfg.history_window_s - 1e-9) {
          history.points.push_back(p);
        }
      }
      request.ego_history = std::move(history);
    }
    if (!request.ablated("no_navigation")) {
      request.navigation_goal = scenario.navigation_goal;
    }
    if (cfg.include_scene) {
      request.scene = ScenePayload{scenario.map, scenario.objects, scenario.traffic_lights};
    }

    try {
      PlanResponse response = agent.plan(request);
      validate_plan_response(response, request);
      tracking = response.trajectory;
      if (tracking.front().t > t + 1e-9) {
        tracking.points.insert(tracking.points.begin(), {t, pose});
      }
      rollout.replan_log.emplace_back(t, std::move(response.trajectory));
    } catch (const AgentError & e) {
      rollout.aborted = true;
      rollout.error_tag = "agent_error";
      rollout.error_detail = std::string(to_string(e.code)) + ": " + e.what();
      break;
    }
  }
  compute_rollout_dynamics(rollout);
  return rollout;
}

inline OrientedBox ego_box_at(const Pose2D & pose, const ReplayConfig & cfg)
{
  return {pose, cfg.ego_half_length_m, cfg.ego_half_width_m};
}

struct CollisionAssessment {
  double score{1.0};  // 0, 0.5, or 1
  std::vector<std::string> at_fault_object_ids;
  std::vector<std::string> at_fault_agent_ids;  // vehicles and vulnerable road users
  std::vector<std::string> no_fault_ids;
};

/// Three-tier at-fault collision score. A contact is at-fault when the other
/// box is (near) stationary or the contact direction is ahead of the ego
/// center; the speed threshold is configurable.
inline CollisionAssessment collision_score(const Rollout & rollout, const ScenarioRecord & scenario,
                                           const ReplayConfig & cfg = {})
{
  CollisionAssessment result;
  std::set<std::string> seen;
  for (size_t k = 0; k < rollout.ego_track.size(); ++k) {
    const TimedPose & tp = rollout.ego_track.points[k];
    const OrientedBox ego = ego_box_at(tp.pose, cfg);
    for (const TrackedObject & obj : scenario.objects) {
      if (seen.count(obj.id)) {
        continue;
      }
      const auto box = obj.box_at(tp.t);
      if (!box || !boxes_overlap(ego, *box)) {
        continue;
      }
      seen.insert(obj.id);
      const double other_speed = obj.velocity_at(tp.t).norm();
      const double contact_lon =
        lateral_longitudinal(box->center, tp.pose).longitudinal;
      const bool at_fault = other_speed < cfg.at_fault_speed_mps || contact_lon >= 0.0;
      if (!at_fault) {
        result.no_fault_ids.push_back(obj.id);
      } else if (is_vulnerable_or_vehicle(obj.category)) {
        result.at_fault_agent_ids.push_back(obj.id);
      } else {
        result.at_fault_object_ids.push_back(obj.id);
      }
    }
  }
  if (!result.at_fault_agent_ids.empty() || result.at_fault_object_ids.size() >= 2) {
    result.score = 0.0;
  } else if (result.at_fault_object_ids.size() == 1) {
    result.score = 0.5;
  }
  return result;
}

/// 0 iff any ego box corner ends up more than 0.3 m outside the drivable
/// area union at any tick.
inline int drivable_compliance(const Rollout & rollout, const MapModel & map,
                               const ReplayConfig & cfg = {})
{
  if (map.drivable_area.empty()) {
    throw ValidationError("drivable compliance: map has no drivable area");
  }
  for (const TimedPose & tp : rollout.ego_track.points) {
    const OrientedBox ego = ego_box_at(tp.pose, cfg);
    for (const Vec2 & corner : ego.corners()) {
      if (distance_to_polygon_union(corner, map.drivable_area) > kDrivableToleranceM) {
        return 0;
      }
    }
  }
  return 1;
}

namespace closedloop_detail {

inline std::vector<Vec2> expert_route(const ScenarioRecord & scenario)
{
  std::vector<Vec2> route;
  route.push_back(scenario.ego_state.pose.position());
  for (const TimedPose & p : scenario.expert_future.points) {
    route.push_back(p.pose.position());
  }
  return route;
}

/// Signed progress of a position sequence projected onto a route polyline.
inline double projected_progress(std::span<const TimedPose> track, std::span<const Vec2> route)
{
  double progress = 0.0;
  for (size_t k = 0; k + 1 < track.size(); ++k) {
    const Vec2 step = track[k + 1].pose.position() - track[k].pose.position();
    const auto proj = project_to_polyline(track[k].pose.position(), route);
    progress += step.dot(proj.tangent);
  }
  return progress;
}

}  // namespace closedloop_detail

struct ProgressResult {
  int gate{1};
  double ratio{1.0};
  double ego_progress_m{0.0};
  double expert_progress_m{0.0};
};

/// Ratio of ego to expert progress along the expert route (both floored at
/// 0.1 m, capped at 1); the gate opens at a ratio of 0.2.
inline ProgressResult progress_gate_and_ratio(const Rollout & rollout,
                                              const ScenarioRecord & scenario)
{
  const auto route = closedloop_detail::expert_route(scenario);
  ProgressResult result;
  result.ego_progress_m =
    closedloop_detail::projected_progress(rollout.ego_track.points, route);
  std::vector<TimedPose> expert_track;
  expert_track.push_back({scenario.t0(), scenario.ego_state.pose});
  expert_track.insert(expert_track.end(), scenario.expert_future.points.begin(),
                      scenario.expert_future.points.end());
  result.expert_progress_m = closedloop_detail::projected_progress(expert_track, route);
  result.ratio = std::min(1.0, std::max(result.ego_progress_m, kProgressFloorM) /
                                 std::max(result.expert_progress_m, kProgressFloorM));
  result.gate = result.ratio < kProgressGateThreshold ? 0 : 1;
  return result;
}

struct DirectionResult {
  double score{1.0};  // 0, 0.5, or 1
  double worst_window_m{0.0};
  bool lane_found{true};
};

/// Accumulates distance traveled against the lane flow (motion more than
/// 120 degrees off the nearest centerline tangent) over sliding 1 s windows.
inline DirectionResult direction_compliance(const Rollout & rollout, const MapModel & map,
                                            const ReplayConfig & cfg = {})
{
  DirectionResult result;
  const auto & pts = rollout.ego_track.points;
  if (pts.size() < 2 || map.lanes.empty()) {
    result.lane_found = !map.lanes.empty();
    return result;
  }
  std::vector<double> wrong(pts.size() - 1, 0.0);
  bool any_lane = false;
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    const Vec2 motion = pts[k + 1].pose.position() - pts[k].pose.position();
    const double len = motion.norm();
    if (len < 1e-9) {
      continue;
    }
    double best_distance = std::numeric_limits<double>::infinity();
    Vec2 tangent{1.0, 0.0};
    for (const Lane & lane : map.lanes) {
      const auto proj = project_to_polyline(pts[k].pose.position(), lane.centerline);
      if (proj.distance < best_distance) {
        best_distance = proj.distance;
        tangent = proj.tangent;
      }
    }
    if (best_distance > kLaneSearchRadiusM) {
      continue;  // no lane near the ego: counts as compliant
    }
    any_lane = true;
    if (motion.dot(tangent) < -0.5 * len) {
      wrong[k] = len;
    }
  }
  result.lane_found = any_lane;
  const auto window =
    std::max<size_t>(1, static_cast<size_t>(std::llround(1.0 / cfg.tick_s)));
  double worst = 0.0;
  double running = 0.0;
  for (size_t k = 0; k < wrong.size(); ++k) {
    running += wrong[k];
    if (k >= window) {
      running -= wrong[k - window];
    }
    worst = std::max(worst, running);
  }
  result.worst_window_m = worst;
  if (worst < kWrongWayCompliantM) {
    result.score = 1.0;
  } else if (worst > kWrongWayViolationM) {
    result.score = 0.0;
  } else {
    result.score = 0.5;
  }
  return result;
}

struct TtcResult {
  int score{1};
  double min_ttc_s{std::numeric_limits<double>::infinity()};
};

/// Projects every box forward at constant velocity and heading in fixed
/// steps up to the TTC horizon; the TTC at a tick is the first step with an
/// ego-box overlap.
inline TtcResult ttc_score(const Rollout & rollout, const ScenarioRecord & scenario,
                           const ReplayConfig & cfg = {})
{
  TtcResult result;
  const auto steps = static_cast<size_t>(std::floor(cfg.ttc_horizon_s / cfg.ttc_step_s + 1e-9));
  for (size_t k = 0; k < rollout.ego_track.size(); ++k) {
    const TimedPose & tp = rollout.ego_track.points[k];
    const Vec2 ego_vel = k < rollout.ego_velocity.size() ? rollout.ego_velocity[k] : Vec2{};
    for (const TrackedObject & obj : scenario.objects) {
      const auto box = obj.box_at(tp.t);
      if (!box) {
        continue;
      }
      const Vec2 obj_vel = obj.velocity_at(tp.t);
      // Cheap reachability prune before the stepwise projection.
      const double reach = (ego_vel.norm() + obj_vel.norm()) * cfg.ttc_horizon_s +
                           cfg.ego_half_length_m + cfg.ego_half_width_m + box->half_length +
                           box->half_width;
      if ((box->center.position() - tp.pose.position()).norm() > reach) {
        continue;
      }
      for (size_t s = 0; s <= steps; ++s) {
        const double tau = static_cast<double>(s) * cfg.ttc_step_s;
        OrientedBox ego = ego_box_at(tp.pose, cfg);
        ego.center.x += ego_vel.x * tau;
        ego.center.y += ego_vel.y * tau;
        OrientedBox other = *box;
        other.center.x += obj_vel.x * tau;
        other.center.y += obj_vel.y * tau;
        if (boxes_overlap(ego, other)) {
          result.min_ttc_s = std::min(result.min_ttc_s, tau);
          break;
        }
      }
    }
  }
  result.score = result.min_ttc_s < kTtcThresholdS ? 0 : 1;
  return result;
}

struct SpeedComplianceResult {
  double score{1.0};
  double violation_integral{0.0};  // integral of over-speed, m
};

/// Time-integral of over-speeding against the nearest lane limit, normalized
/// by the 2.23 m/s tolerance over the scenario duration.
inline SpeedComplianceResult speed_compliance(const Rollout & rollout, const MapModel & map,
                                              const ReplayConfig & cfg = {})
{
  SpeedComplianceResult result;
  const auto & pts = rollout.ego_track.points;
  if (pts.size() < 2 || map.lanes.empty()) {
    return result;
  }
  const double dt = cfg.tick_s;
  double v_int = 0.0;
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    const double speed =
      k < rollout.ego_velocity.size() ? rollout.ego_velocity[k].norm() : 0.0;
    double limit = std::numeric_limits<double>::infinity();
    double best_distance = std::numeric_limits<double>::infinity();
    for (const Lane & lane : map.lanes) {
      const auto proj = project_to_polyline(pts[k].pose.position(), lane.centerline);
      if (proj.distance < best_distance) {
        best_distance = proj.distance;
        limit = lane.speed_limit_mps;
      }
    }
    v_int += std::max(0.0, speed - limit) * dt;
  }
  const double duration = pts.back().t - pts.front().t;
  result.violation_integral = v_int;
  result.score =
    std::max(0.0, 1.0 - v_int / (kSpeedViolationThresholdMps * std::max(duration, 1e-9)));
  return result;
}

/// 0 iff any comfort bound is violated at any tick.
inline int comfort_score(const Rollout & rollout, const ComfortBounds & bounds = {})
{
  for (const TickDerivatives & d : rollout.derivatives) {
    if (d.lon_accel < bounds.lon_accel_min || d.lon_accel > bounds.lon_accel_max ||
        std::abs(d.lat_accel) > bounds.lat_accel_abs || std::abs(d.yaw_rate) > bounds.yaw_rate_abs ||
        std::abs(d.yaw_accel) > bounds.yaw_accel_abs || std::abs(d.lon_jerk) > bounds.lon_jerk_abs ||
        d.jerk_magnitude > bounds.jerk_abs) {
      return 0;
    }
  }
  return 1;
}

struct ClosedLoopBreakdown {
  double s_no_collision{1.0};  // 0, 0.5, or 1
  int s_drivable{1};
  int s_progress_gate{1};
  double s_direction{1.0};
  int s_ttc{1};
  double s_speed{1.0};
  double s_progress{1.0};
  int s_comfort{1};
  double composite{0.0};  // in [0, 100]
  // Diagnostics
  double min_ttc_s{std::numeric_limits<double>::infinity()};
  double worst_wrong_way_m{0.0};
  double speed_violation_integral{0.0};
  std::string error_tag;
  std::string error_detail;
};

/// Composite closed-loop score: the gate product times the weighted average
/// (5, 5, 4, 5, 2)/21 of the weighted metrics, scaled to [0, 100]. The 0.5
/// collision tier multiplies into the gate.
inline double closedloop_score(const ClosedLoopBreakdown & b)
{
  const double gate = b.s_no_collision * b.s_drivable * b.s_progress_gate;
  const double weighted = (5.0 * b.s_direction + 5.0 * b.s_ttc + 4.0 * b.s_speed +
                           5.0 * b.s_progress + 2.0 * b.s_comfort) /
                          21.0;
  return gate * weighted * 100.0;
}

/// Runs every closed-loop metric over a completed rollout.
inline ClosedLoopBreakdown score_closed_loop(const Rollout & rollout,
                                             const ScenarioRecord & scenario,
                                             const ReplayConfig & cfg = {})
{
  ClosedLoopBreakdown b;
  if (rollout.aborted) {
    b.s_no_collision = 0.0;
    b.s_drivable = 0;
    b.s_progress_gate = 0;
    b.s_direction = 0.0;
    b.s_ttc = 0;
    b.s_speed = 0.0;
    b.s_progress = 0.0;
    b.s_comfort = 0;
    b.composite = 0.0;
    b.error_tag = rollout.error_tag;
    b.error_detail = rollout.error_detail;
    return b;
  }
  const auto collision = collision_score(rollout, scenario, cfg);
  b.s_no_collision = collision.score;
  b.s_drivable = drivable_compliance(rollout, scenario.map, cfg);
  const auto progress = progress_gate_and_ratio(rollout, scenario);
  b.s_progress_gate = progress.gate;
  b.s_progress = progress.ratio;
  const auto direction = direction_compliance(rollout, scenario.map, cfg);
  b.s_direction = direction.score;
  b.worst_wrong_way_m = direction.worst_window_m;
  const auto ttc = ttc_score(rollout, scenario, cfg);
  b.s_ttc = ttc.score;
  b.min_ttc_s = ttc.min_ttc_s;
  const auto speed = speed_compliance(rollout, scenario.map, cfg);
  b.s_speed = speed.score;
  b.speed_violation_integral = speed.violation_integral;
  b.s_comfort = comfort_score(rollout, cfg.comfort);
  b.composite = closedloop_score(b);
  return b;
}

}  // namespace planprobe
