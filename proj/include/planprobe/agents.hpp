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
#include <bit>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "planprobe/errors.hpp"
#include "planprobe/hash.hpp"
#include "planprobe/scenario.hpp"
#include "planprobe/scenario_io.hpp"
#include "planprobe/trajectory.hpp"

namespace planprobe {

inline constexpr int kProtocolVersion = 1;

enum class ManeuverDirection { left, straight, right };

inline const char * to_string(ManeuverDirection d)
{
  switch (d) {
    case ManeuverDirection::left:
      return "left";
    case ManeuverDirection::straight:
      return "straight";
    case ManeuverDirection::right:
      return "right";
  }
  return "straight";
}

inline ManeuverDirection maneuver_direction_from_string(const std::string & s)
{
  if (s == "left") return ManeuverDirection::left;
  if (s == "straight") return ManeuverDirection::straight;
  if (s == "right") return ManeuverDirection::right;
  throw ParseError("unknown maneuver direction: " + s);
}

struct ScenePayload {
  MapModel map;
  std::vector<TrackedObject> objects;
  std::vector<TrafficLightObservation> traffic_lights;
};

struct PlanRequest {
  std::string scenario_id;
  double tick_t{0.0};
  std::optional<EgoState> ego_state;
  std::optional<Trajectory> ego_history;
  std::optional<Pose2D> navigation_goal;
  std::vector<std::string> prior_ablation_flags;  // no_history | no_ego | no_navigation
  std::optional<ScenePayload> scene;
  double horizon_s{3.0};
  double dt_s{kCanonicalTickS};

  bool ablated(const std::string & flag) const
  {
    return std::find(prior_ablation_flags.begin(), prior_ablation_flags.end(), flag) !=
           prior_ablation_flags.end();
  }

  void validate() const
  {
    if (ablated("no_ego") == ego_state.has_value()) {
      throw ValidationError("plan request: no_ego flag inconsistent with ego_state presence");
    }
    if (ablated("no_history") == ego_history.has_value()) {
      throw ValidationError("plan request: no_history flag inconsistent with ego_history");
    }
    if (ablated("no_navigation") == navigation_goal.has_value()) {
      throw ValidationError("plan request: no_navigation flag inconsistent with navigation_goal");
    }
  }
};

struct PlanResponse {
  Trajectory trajectory;
  std::optional<std::string> reasoning_text;
  std::optional<ManeuverDirection> reasoning_direction;
};

/// Checks the response contract: a valid trajectory that starts within one
/// sampling period of the request tick and spans the requested horizon.
inline void validate_plan_response(const PlanResponse & response, const PlanRequest & request)
{
  try {
    response.trajectory.validate("plan response trajectory");
  } catch (const ValidationError & e) {
    throw AgentError(AgentErrorCode::invalid_trajectory, e.what());
  }
  const double start = response.trajectory.front().t;
  if (start < request.tick_t - 1e-9 || start > request.tick_t + request.dt_s + 1e-9) {
    throw AgentError(
      AgentErrorCode::invalid_trajectory,
      "plan must start within dt of the request tick (tick_t=" + std::to_string(request.tick_t) +
        ", first point t=" + std::to_string(start) + ")");
  }
  if (response.trajectory.back().t + 1e-9 < request.tick_t + request.horizon_s) {
    throw AgentError(
      AgentErrorCode::invalid_trajectory,
      "plan must span the requested horizon of " + std::to_string(request.horizon_s) + " s");
  }
}

// Wire encoding: one JSON object per line over the agent's standard streams.
inline json plan_request_to_json(const PlanRequest & request)
{
  json j;
  j["proto"] = kProtocolVersion;
  j["type"] = "plan";
  j["scenario_id"] = request.scenario_id;
  j["tick_t"] = request.tick_t;
  if (request.ego_state) {
    j["ego_state"] = ego_state_to_json(*request.ego_state);
  }
  if (request.ego_history) {
    j["ego_history"] = trajectory_to_json(*request.ego_history);
  }
  if (request.navigation_goal) {
    j["navigation_goal"] = detail::pose_to_json(*request.navigation_goal);
  }
  j["prior_ablation_flags"] = request.prior_ablation_flags;
  if (request.scene) {
    json scene;
    scene["map"] = map_to_json(request.scene->map);
    scene["objects"] = json::array();
    for (const TrackedObject & obj : request.scene->objects) {
      scene["objects"].push_back(object_to_json(obj));
    }
    scene["traffic_lights"] = json::array();
    for (const TrafficLightObservation & tl : request.scene->traffic_lights) {
      scene["traffic_lights"].push_back(
        {{"id", tl.id}, {"state", to_string(tl.state)}, {"t", tl.t}});
    }
    j["scene"] = std::move(scene);
  }
  j["horizon_s"] = request.horizon_s;
  j["dt_s"] = request.dt_s;
  return j;
}

inline PlanRequest plan_request_from_json(const json & j)
{
  PlanRequest request;
  request.scenario_id = detail::require_field(j, "scenario_id").get<std::string>();
  request.tick_t = detail::require_field(j, "tick_t").get<double>();
  if (j.contains("ego_state")) {
    request.ego_state = ego_state_from_json(j["ego_state"]);
  }
  if (j.contains("ego_history")) {
    request.ego_history = trajectory_from_json(j["ego_history"], "ego_history");
  }
  if (j.contains("navigation_goal")) {
    request.navigation_goal = detail::pose_from_json(j["navigation_goal"], "navigation_goal");
  }
  if (j.contains("prior_ablation_flags")) {
    request.prior_ablation_flags = j["prior_ablation_flags"].get<std::vector<std::string>>();
  }
  if (j.contains("scene")) {
    ScenePayload scene;
    scene.map = map_from_json(detail::require_field(j["scene"], "map"));
    if (j["scene"].contains("objects")) {
      for (const json & obj : j["scene"]["objects"]) {
        scene.objects.push_back(object_from_json(obj));
      }
    }
    if (j["scene"].contains("traffic_lights")) {
      for (const json & tl : j["scene"]["traffic_lights"]) {
        TrafficLightObservation obs;
        obs.id = detail::require_field(tl, "id").get<std::string>();
        obs.state = light_state_from_string(detail::require_field(tl, "state").get<std::string>());
        obs.t = detail::require_field(tl, "t").get<double>();
        scene.traffic_lights.push_back(std::move(obs));
      }
    }
    request.scene = std::move(scene);
  }
  request.horizon_s = detail::require_field(j, "horizon_s").get<double>();
  request.dt_s = detail::require_field(j, "dt_s").get<double>();
  return request;
}

inline json plan_response_to_json(const PlanResponse & response)
{
  json j;
  j["proto"] = kProtocolVersion;
  j["trajectory"] = trajectory_to_json(response.trajectory);
  if (response.reasoning_text) {
    j["reasoning_text"] = *response.reasoning_text;
  }
  if (response.reasoning_direction) {
    j["reasoning_direction"] = to_string(*response.reasoning_direction);
  }
  return j;
}

inline PlanResponse plan_response_from_json(const json & j)
{
  PlanResponse response;
  response.trajectory = trajectory_from_json(detail::require_field(j, "trajectory"), "trajectory");
  if (j.contains("reasoning_text")) {
    response.reasoning_text = j["reasoning_text"].get<std::string>();
  }
  if (j.contains("reasoning_direction")) {
    response.reasoning_direction =
      maneuver_direction_from_string(j["reasoning_direction"].get<std::string>());
  }
  return response;
}

class Agent {
public:
  virtual ~Agent() = default;
  virtual PlanResponse plan(const PlanRequest & request) = 0;
  virtual std::string name() const = 0;
};

/// Builds the request a harness sends for a scenario at its decision time.
inline PlanRequest make_plan_request(const ScenarioRecord & scenario, double horizon_s,
                                     double dt_s = kCanonicalTickS,
                                     const std::vector<std::string> & ablations = {},
                                     bool include_scene = true)
{
  PlanRequest request;
  request.scenario_id = scenario.id;
  request.tick_t = scenario.t0();
  request.prior_ablation_flags = ablations;
  if (!request.ablated("no_ego")) {
    request.ego_state = scenario.ego_state;
  }
  if (!request.ablated("no_history")) {
    request.ego_history = scenario.ego_history;
  }
  if (!request.ablated("no_navigation")) {
    request.navigation_goal = scenario.navigation_goal;
  }
  if (include_scene) {
    request.scene = ScenePayload{scenario.map, scenario.objects, scenario.traffic_lights};
  }
  request.horizon_s = horizon_s;
  request.dt_s = dt_s;
  return request;
}

/// Shortcut pole: constant-velocity, constant-yaw-rate rollout from the ego
/// state; the yaw rate comes from the last two history headings. The scene
/// payload is ignored entirely.
class PriorExtrapolatorAgent : public Agent {
public:
  PlanResponse plan(const PlanRequest & request) override
  {
    if (!request.ego_state) {
      throw AgentError(AgentErrorCode::process, "prior extrapolator requires ego_state");
    }
    double yaw_rate = 0.0;
    if (request.ego_history && request.ego_history->size() >= 2) {
      const auto & pts = request.ego_history->points;
      const TimedPose & a = pts[pts.size() - 2];
      const TimedPose & b = pts[pts.size() - 1];
      if (b.t - a.t > 1e-9) {
        yaw_rate = wrap_angle(b.pose.heading - a.pose.heading) / (b.t - a.t);
      }
    }
    const EgoState & ego = *request.ego_state;
    const auto steps = static_cast<size_t>(std::ceil(request.horizon_s / request.dt_s - 1e-9));
    PlanResponse response;
    response.trajectory.dt = request.dt_s;
    Vec2 pos = ego.pose.position();
    for (size_t k = 1; k <= steps; ++k) {
      const double t_prev = static_cast<double>(k - 1) * request.dt_s;
      const double t_mid = t_prev + 0.5 * request.dt_s;
      pos += rotate(ego.velocity, yaw_rate * t_mid) * request.dt_s;
      const double t_k = static_cast<double>(k) * request.dt_s;
      response.trajectory.points.push_back(
        {request.tick_t + t_k, {pos.x, pos.y, ego.pose.heading + yaw_rate * t_k}});
    }
    return response;
  }

  std::string name() const override { return "mock_prior_extrapolator"; }
};

/// Grounded pole: pure pursuit along the nearest lane centerline at the lane
/// speed limit (comfort-capped). Reads only the ego position, the map, and
/// the goal, so its output is invariant to velocity and history perturbations.
class SceneGroundedAgent : public Agent {
public:
  PlanResponse plan(const PlanRequest & request) override
  {
    if (!request.scene || request.scene->map.lanes.empty()) {
      throw AgentError(AgentErrorCode::process, "scene-grounded planner requires a lane map");
    }
    if (!request.ego_state) {
      throw AgentError(AgentErrorCode::process, "scene-grounded planner requires a localization fix");
    }
    const Vec2 ego_pos = request.ego_state->pose.position();
    const Lane * lane = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const Lane & candidate : request.scene->map.lanes) {
      const double d = project_to_polyline(ego_pos, candidate.centerline).distance;
      if (d < best_distance - 1e-9) {
        best_distance = d;
        lane = &candidate;
      } else if (lane != nullptr && d < best_distance + 1e-6 && request.navigation_goal) {
        // Equidistant lanes: prefer the one ending nearest the goal.
        const Vec2 goal = request.navigation_goal->position();
        if ((candidate.centerline.back() - goal).norm() < (lane->centerline.back() - goal).norm()) {
          lane = &candidate;
        }
      }
    }
    if (lane == nullptr || best_distance > 10.0) {
      throw AgentError(AgentErrorCode::process, "no lane within 10 m of the ego position");
    }

    const auto & path = lane->centerline;
    const auto start_proj = project_to_polyline(ego_pos, path);
    Vec2 pos = ego_pos;
    double heading = std::atan2(start_proj.tangent.y, start_proj.tangent.x);
    double speed = -1.0;  // initialized from the first curvature estimate
    const double dt = request.dt_s;
    const auto steps = static_cast<size_t>(std::ceil(request.horizon_s / dt - 1e-9));

    PlanResponse response;
    response.trajectory.dt = dt;
    for (size_t k = 1; k <= steps; ++k) {
      const auto proj = project_to_polyline(pos, path);
      const double lookahead = std::max(5.0, 1.0 * std::max(speed, 0.0));
      const Vec2 target = polyline_point_at(path, proj.arclength + lookahead);
      const double alpha = wrap_angle(std::atan2(target.y - pos.y, target.x - pos.x) - heading);
      const double curvature = 2.0 * std::sin(alpha) / lookahead;
      const double lat_cap =
        std::sqrt(kComfortLatAccel / std::max(std::abs(curvature), 1e-6));
      const double target_speed = std::min(lane->speed_limit_mps, lat_cap);
      if (speed < 0.0) {
        speed = target_speed;
      } else {
        speed = std::clamp(target_speed, speed - kComfortLonAccel * dt,
                           speed + kComfortLonAccel * dt);
      }
      heading = wrap_angle(heading + curvature * speed * dt);
      pos += Vec2{std::cos(heading), std::sin(heading)} * (speed * dt);
      response.trajectory.points.push_back(
        {request.tick_t + static_cast<double>(k) * dt, {pos.x, pos.y, heading}});
    }
    return response;
  }

  std::string name() const override { return "mock_scene_grounded"; }

private:
  // Conservative caps well inside the comfort bounds.
  static constexpr double kComfortLatAccel = 3.9;  // m/s^2
  static constexpr double kComfortLonAccel = 2.0;  // m/s^2
};

/// Wraps another mock with seeded Gaussian waypoint noise. The noise stream
/// is keyed by (seed, scenario_id, tick_t) only, so repeated queries for the
/// same decision point see the same realization regardless of call order.
class NoisyAgent : public Agent {
public:
  NoisyAgent(std::unique_ptr<Agent> inner, double sigma, uint64_t seed)
  : inner_(std::move(inner)), sigma_(sigma), seed_(seed)
  {
  }

  PlanResponse plan(const PlanRequest & request) override
  {
    PlanResponse response = inner_->plan(request);
    uint64_t key = fnv1a64(request.scenario_id, seed_ ^ 0x9e3779b97f4a7c15ull);
    key ^= std::bit_cast<uint64_t>(request.tick_t);
    std::mt19937_64 rng(key);
    std::normal_distribution<double> noise(0.0, sigma_);
    for (TimedPose & p : response.trajectory.points) {
      p.pose.x += noise(rng);
      p.pose.y += noise(rng);
    }
    return response;
  }

  std::string name() const override { return "mock_noisy(" + inner_->name() + ")"; }

private:
  std::unique_ptr<Agent> inner_;
  double sigma_;
  uint64_t seed_;
};

/// Replays the logged expert future; the harness-side reference agent.
class ExpertEchoAgent : public Agent {
public:
  explicit ExpertEchoAgent(std::span<const ScenarioRecord> corpus)
  {
    for (const ScenarioRecord & rec : corpus) {
      futures_[rec.id] = rec.expert_future;
    }
  }

  PlanResponse plan(const PlanRequest & request) override
  {
    const auto it = futures_.find(request.scenario_id);
    if (it == futures_.end()) {
      throw AgentError(AgentErrorCode::process,
                       "expert echo has no scenario " + request.scenario_id);
    }
    PlanResponse response;
    response.trajectory.dt = it->second.dt;
    for (const TimedPose & p : it->second.points) {
      if (p.t > request.tick_t + 1e-9 &&
          p.t <= request.tick_t + request.horizon_s + 1e-9) {
        response.trajectory.points.push_back(p);
      }
    }
    if (response.trajectory.points.empty()) {
      throw AgentError(AgentErrorCode::process, "expert future does not cover the request window");
    }
    return response;
  }

  std::string name() const override { return "expert_echo"; }

private:
  std::unordered_map<std::string, Trajectory> futures_;
};

}  // namespace planprobe
