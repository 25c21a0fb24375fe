// Test-only builders for deterministic synthetic driving scenes.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "planprobe/scenario.hpp"

namespace planprobe::testsupport {

struct PathPoint {
  double t;
  Vec2 pos;
  double heading;
};

// Integrates a speed/yaw-rate profile through t in [t_begin, t_end] at the
// canonical tick, passing through the origin with heading 0 at t = 0.
template <typename YawRateFn>
inline std::vector<PathPoint> integrate_path(double v, YawRateFn && yaw_rate, double t_begin,
                                             double t_end)
{
  const double dt = kCanonicalTickS;
  std::vector<PathPoint> fwd{{0.0, {0.0, 0.0}, 0.0}};
  for (double t = 0.0; t < t_end - 1e-9; t += dt) {
    const PathPoint & cur = fwd.back();
    const double h_mid = cur.heading + 0.5 * yaw_rate(t) * dt;
    PathPoint next;
    next.t = cur.t + dt;
    next.pos = cur.pos + Vec2{std::cos(h_mid), std::sin(h_mid)} * (v * dt);
    next.heading = cur.heading + yaw_rate(t) * dt;
    fwd.push_back(next);
  }
  std::vector<PathPoint> bwd{{0.0, {0.0, 0.0}, 0.0}};
  for (double t = 0.0; t > t_begin + 1e-9; t -= dt) {
    const PathPoint & cur = bwd.back();
    const double h_mid = cur.heading - 0.5 * yaw_rate(t - dt) * dt;
    PathPoint prev;
    prev.t = cur.t - dt;
    prev.pos = cur.pos - Vec2{std::cos(h_mid), std::sin(h_mid)} * (v * dt);
    prev.heading = cur.heading - yaw_rate(t - dt) * dt;
    bwd.push_back(prev);
  }
  std::vector<PathPoint> path(bwd.rbegin(), bwd.rend());
  path.insert(path.end(), fwd.begin() + 1, fwd.end());
  return path;
}

// Builds a full record around a path: lane centerline along it, a drivable
// band of the given half width, history for t <= 0 and future for t > 0.
inline ScenarioRecord record_from_path(const std::string & id, const std::string & type,
                                       const std::vector<PathPoint> & path, double v,
                                       double band_half_width, double speed_limit)
{
  ScenarioRecord rec;
  rec.id = id;
  rec.scenario_type = type;

  // Extend the lane and the drivable band beyond the path so the ego box
  // never pokes past the map at the scenario ends.
  constexpr double kExtension = 12.0;
  std::vector<PathPoint> extended = path;
  const Vec2 dir_front{std::cos(path.front().heading), std::sin(path.front().heading)};
  const Vec2 dir_back{std::cos(path.back().heading), std::sin(path.back().heading)};
  extended.insert(extended.begin(),
                  {path.front().t - 1.0, path.front().pos - dir_front * kExtension,
                   path.front().heading});
  extended.push_back(
    {path.back().t + 1.0, path.back().pos + dir_back * kExtension, path.back().heading});

  Lane lane;
  Polygon band_left_side;
  std::vector<Vec2> band_right_side;
  for (const PathPoint & p : extended) {
    const Vec2 left{-std::sin(p.heading), std::cos(p.heading)};
    lane.centerline.push_back(p.pos);
    band_left_side.vertices.push_back(p.pos + left * band_half_width);
    band_right_side.push_back(p.pos - left * band_half_width);
  }
  lane.speed_limit_mps = speed_limit;
  rec.map.lanes.push_back(lane);
  Polygon band = band_left_side;
  band.vertices.insert(band.vertices.end(), band_right_side.rbegin(), band_right_side.rend());
  rec.map.drivable_area.push_back(std::move(band));

  for (const PathPoint & p : path) {
    const TimedPose tp{p.t, {p.pos.x, p.pos.y, p.heading}};
    if (p.t <= 1e-12) {
      rec.ego_history.points.push_back(tp);
    } else {
      rec.expert_future.points.push_back(tp);
    }
  }
  rec.ego_history.dt = kCanonicalTickS;
  rec.expert_future.dt = kCanonicalTickS;

  rec.ego_state.t = 0.0;
  rec.ego_state.pose = rec.ego_history.back().pose;
  rec.ego_state.velocity = rec.ego_state.pose.direction() * v;
  rec.ego_state.acceleration = {0.0, 0.0};
  const Pose2D goal_pose = rec.expert_future.back().pose;
  rec.navigation_goal = goal_pose;
  return rec;
}

inline ScenarioRecord make_straight_scenario(const std::string & id, double v,
                                             double future_span = 3.5)
{
  const auto path = integrate_path(v, [](double) { return 0.0; }, -2.0, future_span);
  return record_from_path(id, "straight", path, v, 6.0, std::max(15.0, v + 1.0));
}

// History and future both follow a constant-curvature arc.
inline ScenarioRecord make_curved_scenario(const std::string & id, double v, double yaw_rate,
                                           double future_span = 3.5)
{
  const auto path = integrate_path(v, [yaw_rate](double) { return yaw_rate; }, -2.0, future_span);
  return record_from_path(id, yaw_rate > 0.0 ? "curved_left" : "curved_right", path, v, 6.0,
                          std::max(15.0, v + 1.0));
}

// Straight history; the expert path eases into a turn after t = turn_start.
// The yaw-rate ramp keeps the expert profile inside the comfort bounds.
inline ScenarioRecord make_turn_ahead_scenario(const std::string & id, double v, double yaw_rate,
                                               double turn_start = 0.5, double ramp = 0.6,
                                               double future_span = 3.5)
{
  const auto profile = [=](double t) {
    if (t < turn_start) {
      return 0.0;
    }
    return yaw_rate * std::min(1.0, (t - turn_start) / ramp);
  };
  const auto path = integrate_path(v, profile, -2.0, future_span);
  return record_from_path(id, "turn_ahead", path, v, 5.0, std::max(15.0, v + 1.0));
}

inline ScenarioRecord make_stationary_scenario(const std::string & id, double future_span = 3.5)
{
  ScenarioRecord rec;
  rec.id = id;
  rec.scenario_type = "stationary";

  Lane lane;
  for (double x = -50.0; x <= 60.0; x += 5.0) {
    lane.centerline.push_back({x, 0.0});
  }
  lane.speed_limit_mps = 10.0;
  rec.map.lanes.push_back(lane);
  rec.map.drivable_area.push_back(
    Polygon{{{-60.0, -6.0}, {70.0, -6.0}, {70.0, 6.0}, {-60.0, 6.0}}});

  const double dt = kCanonicalTickS;
  const auto history_steps = static_cast<int>(2.0 / dt + 0.5);
  for (int k = -history_steps; k <= 0; ++k) {
    rec.ego_history.points.push_back({k * dt, {0.0, 0.0, 0.0}});
  }
  const auto future_steps = static_cast<int>(future_span / dt + 0.5);
  for (int k = 1; k <= future_steps; ++k) {
    rec.expert_future.points.push_back({k * dt, {0.0, 0.0, 0.0}});
  }
  rec.ego_state = EgoState{{0.0, 0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, 0.0};
  rec.navigation_goal = {0.0, 0.0, 0.0};

  TrackedObject parked;
  parked.id = id + "_obstacle";
  parked.category = ObjectCategory::object;
  parked.track = {{-2.0, {{40.0, 3.0, 0.0}, 0.5, 0.5}}, {future_span, {{40.0, 3.0, 0.0}, 0.5, 0.5}}};
  parked.velocity = {{0.0, 0.0}, {0.0, 0.0}};
  rec.objects.push_back(parked);
  return rec;
}

// 50 scenes spanning the probe acceptance mix: straight and curved movers
// plus stationary scenes, speeds 5-15 m/s.
inline std::vector<ScenarioRecord> make_probe_corpus()
{
  std::vector<ScenarioRecord> corpus;
  corpus.push_back(make_straight_scenario("straight_00", 5.0));
  for (int i = 1; i < 17; ++i) {
    const double v = 6.5 + 8.5 * static_cast<double>(i - 1) / 15.0;  // 6.5 .. 15.0
    corpus.push_back(make_straight_scenario("straight_" + std::to_string(i), v));
  }
  for (int i = 0; i < 12; ++i) {
    const double v = 8.0 + 4.0 * static_cast<double>(i) / 11.0;  // 8.0 .. 12.0
    const double w = 0.12 + 0.16 * static_cast<double>(i) / 11.0;
    corpus.push_back(make_curved_scenario("curved_left_" + std::to_string(i), v, w));
    corpus.push_back(make_curved_scenario("curved_right_" + std::to_string(i), v, -w));
  }
  for (int i = 0; i < 9; ++i) {
    corpus.push_back(make_stationary_scenario("stationary_" + std::to_string(i)));
  }
  return corpus;
}

// Small mixed corpus for replay determinism and ranking checks.
inline std::vector<ScenarioRecord> make_replay_corpus()
{
  std::vector<ScenarioRecord> corpus;
  corpus.push_back(make_straight_scenario("straight_a", 10.0));
  corpus.push_back(make_straight_scenario("straight_b", 7.0));
  corpus.push_back(make_curved_scenario("curved_a", 8.0, 0.2));
  corpus.push_back(make_turn_ahead_scenario("turn_a", 10.0, 0.3));
  corpus.push_back(make_turn_ahead_scenario("turn_b", 12.0, -0.3));
  corpus.push_back(make_stationary_scenario("stationary_a"));
  return corpus;
}

}  // namespace planprobe::testsupport
