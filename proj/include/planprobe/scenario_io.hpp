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

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "planprobe/errors.hpp"
#include "planprobe/scenario.hpp"

namespace planprobe {

using json = nlohmann::json;

namespace detail {

inline const json & require_field(const json & j, const char * name)
{
  const auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError(std::string("missing required field `") + name + "`");
  }
  return *it;
}

inline Vec2 vec2_from_json(const json & j, const char * what)
{
  if (!j.is_array() || j.size() != 2) {
    throw ParseError(std::string(what) + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json vec2_to_json(const Vec2 & v)
{
  return json::array({v.x, v.y});
}

inline Pose2D pose_from_json(const json & j, const char * what)
{
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(std::string(what) + ": expected [x, y, heading]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json pose_to_json(const Pose2D & p)
{
  return json::array({p.x, p.y, p.heading});
}

}  // namespace detail

inline Trajectory trajectory_from_json(const json & j, const char * what)
{
  if (!j.is_array()) {
    throw ParseError(std::string(what) + ": expected an array of [t, x, y, heading]");
  }
  Trajectory traj;
  traj.points.reserve(j.size());
  for (const json & p : j) {
    if (!p.is_array() || p.size() != 4) {
      throw ParseError(std::string(what) + ": each point must be [t, x, y, heading]");
    }
    traj.points.push_back(
      {p[0].get<double>(), {p[1].get<double>(), p[2].get<double>(), p[3].get<double>()}});
  }
  traj.dt = infer_dt(traj.points);
  return traj;
}

inline json trajectory_to_json(const Trajectory & traj)
{
  json out = json::array();
  for (const TimedPose & p : traj.points) {
    out.push_back(json::array({p.t, p.pose.x, p.pose.y, p.pose.heading}));
  }
  return out;
}

inline MapModel map_from_json(const json & j)
{
  MapModel map;
  for (const json & poly : detail::require_field(j, "drivable_area")) {
    Polygon polygon;
    for (const json & v : poly) {
      polygon.vertices.push_back(detail::vec2_from_json(v, "map.drivable_area"));
    }
    map.drivable_area.push_back(std::move(polygon));
  }
  for (const json & lane_j : detail::require_field(j, "lanes")) {
    Lane lane;
    for (const json & v : detail::require_field(lane_j, "centerline")) {
      lane.centerline.push_back(detail::vec2_from_json(v, "map.lanes.centerline"));
    }
    lane.speed_limit_mps = detail::require_field(lane_j, "speed_limit_mps").get<double>();
    map.lanes.push_back(std::move(lane));
  }
  if (j.contains("stop_lines")) {
    for (const json & sl : j["stop_lines"]) {
      StopLine line;
      line.light_id = detail::require_field(sl, "light_id").get<std::string>();
      const json & seg = detail::require_field(sl, "segment");
      if (!seg.is_array() || seg.size() != 2) {
        throw ParseError("map.stop_lines.segment: expected [[x, y], [x, y]]");
      }
      line.segment = {detail::vec2_from_json(seg[0], "map.stop_lines.segment"),
                      detail::vec2_from_json(seg[1], "map.stop_lines.segment")};
      map.stop_lines.push_back(std::move(line));
    }
  }
  return map;
}

inline json map_to_json(const MapModel & map)
{
  json out;
  out["drivable_area"] = json::array();
  for (const Polygon & poly : map.drivable_area) {
    json pj = json::array();
    for (const Vec2 & v : poly.vertices) {
      pj.push_back(detail::vec2_to_json(v));
    }
    out["drivable_area"].push_back(std::move(pj));
  }
  out["lanes"] = json::array();
  for (const Lane & lane : map.lanes) {
    json lj;
    lj["centerline"] = json::array();
    for (const Vec2 & v : lane.centerline) {
      lj["centerline"].push_back(detail::vec2_to_json(v));
    }
    lj["speed_limit_mps"] = lane.speed_limit_mps;
    out["lanes"].push_back(std::move(lj));
  }
  out["stop_lines"] = json::array();
  for (const StopLine & sl : map.stop_lines) {
    out["stop_lines"].push_back(
      {{"light_id", sl.light_id},
       {"segment",
        json::array({detail::vec2_to_json(sl.segment[0]), detail::vec2_to_json(sl.segment[1])})}});
  }
  return out;
}

// Object tracks serialize as [t, x, y, heading, half_length, half_width] rows
// with a parallel `velocity` array of [vx, vy].
inline TrackedObject object_from_json(const json & j)
{
  TrackedObject obj;
  obj.id = detail::require_field(j, "id").get<std::string>();
  obj.category =
    object_category_from_string(detail::require_field(j, "category").get<std::string>());
  for (const json & row : detail::require_field(j, "track")) {
    if (!row.is_array() || row.size() != 6) {
      throw ParseError("objects.track: expected [t, x, y, heading, half_length, half_width]");
    }
    BoxSample sample;
    sample.t = row[0].get<double>();
    sample.box.center = {row[1].get<double>(), row[2].get<double>(), row[3].get<double>()};
    sample.box.half_length = row[4].get<double>();
    sample.box.half_width = row[5].get<double>();
    obj.track.push_back(sample);
  }
  for (const json & v : detail::require_field(j, "velocity")) {
    obj.velocity.push_back(detail::vec2_from_json(v, "objects.velocity"));
  }
  return obj;
}

inline json object_to_json(const TrackedObject & obj)
{
  json out;
  out["id"] = obj.id;
  out["category"] = to_string(obj.category);
  out["track"] = json::array();
  for (const BoxSample & s : obj.track) {
    out["track"].push_back(json::array(
      {s.t, s.box.center.x, s.box.center.y, s.box.center.heading, s.box.half_length,
       s.box.half_width}));
  }
  out["velocity"] = json::array();
  for (const Vec2 & v : obj.velocity) {
    out["velocity"].push_back(detail::vec2_to_json(v));
  }
  return out;
}

inline EgoState ego_state_from_json(const json & j)
{
  EgoState ego;
  ego.t = detail::require_field(j, "t").get<double>();
  ego.pose = detail::pose_from_json(detail::require_field(j, "pose"), "ego_state.pose");
  ego.velocity = detail::vec2_from_json(detail::require_field(j, "velocity"), "ego_state.velocity");
  ego.acceleration =
    detail::vec2_from_json(detail::require_field(j, "acceleration"), "ego_state.acceleration");
  return ego;
}

inline json ego_state_to_json(const EgoState & ego)
{
  return {{"t", ego.t},
          {"pose", detail::pose_to_json(ego.pose)},
          {"velocity", detail::vec2_to_json(ego.velocity)},
          {"acceleration", detail::vec2_to_json(ego.acceleration)}};
}

inline ScenarioRecord scenario_from_json(const json & j)
{
  ScenarioRecord rec;
  rec.id = detail::require_field(j, "id").get<std::string>();
  rec.scenario_type = detail::require_field(j, "scenario_type").get<std::string>();
  rec.map = map_from_json(detail::require_field(j, "map"));
  for (const json & obj : detail::require_field(j, "objects")) {
    rec.objects.push_back(object_from_json(obj));
  }
  for (const json & tl : detail::require_field(j, "traffic_lights")) {
    TrafficLightObservation obs;
    obs.id = detail::require_field(tl, "id").get<std::string>();
    obs.state = light_state_from_string(detail::require_field(tl, "state").get<std::string>());
    obs.t = detail::require_field(tl, "t").get<double>();
    rec.traffic_lights.push_back(std::move(obs));
  }
  rec.ego_history = trajectory_from_json(detail::require_field(j, "ego_history"), "ego_history");
  rec.ego_state = ego_state_from_json(detail::require_field(j, "ego_state"));
  rec.navigation_goal =
    detail::pose_from_json(detail::require_field(j, "navigation_goal"), "navigation_goal");
  rec.expert_future =
    trajectory_from_json(detail::require_field(j, "expert_future"), "expert_future");
  rec.validate();
  return rec;
}

inline json scenario_to_json(const ScenarioRecord & rec)
{
  json out;
  out["id"] = rec.id;
  out["scenario_type"] = rec.scenario_type;
  out["map"] = map_to_json(rec.map);
  out["objects"] = json::array();
  for (const TrackedObject & obj : rec.objects) {
    out["objects"].push_back(object_to_json(obj));
  }
  out["traffic_lights"] = json::array();
  for (const TrafficLightObservation & tl : rec.traffic_lights) {
    out["traffic_lights"].push_back({{"id", tl.id}, {"state", to_string(tl.state)}, {"t", tl.t}});
  }
  out["ego_history"] = trajectory_to_json(rec.ego_history);
  out["ego_state"] = ego_state_to_json(rec.ego_state);
  out["navigation_goal"] = detail::pose_to_json(rec.navigation_goal);
  out["expert_future"] = trajectory_to_json(rec.expert_future);
  return out;
}

/// Loads a JSON Lines scenario corpus. Errors carry the 1-based line number.
inline std::vector<ScenarioRecord> load_scenarios(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open corpus file: " + path);
  }
  std::vector<ScenarioRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      records.push_back(scenario_from_json(json::parse(line)));
    } catch (const json::exception & e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error & e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

inline void save_scenarios(const std::string & path, std::span<const ScenarioRecord> records)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open corpus file for writing: " + path);
  }
  for (const ScenarioRecord & rec : records) {
    out << scenario_to_json(rec).dump() << "\n";
  }
  if (!out) {
    throw Error("failed while writing corpus file: " + path);
  }
}

}  // namespace planprobe
