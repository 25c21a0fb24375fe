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

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "planprobe/errors.hpp"
#include "planprobe/geometry.hpp"
#include "planprobe/trajectory.hpp"

namespace planprobe {

/// Minimum expert-future coverage required for the longest scoring horizon.
inline constexpr double kMinExpertFutureSpanS = 3.0;

enum class ObjectCategory { vehicle, pedestrian, bicycle, object };

inline const char * to_string(ObjectCategory c)
{
  switch (c) {
    case ObjectCategory::vehicle:
      return "vehicle";
    case ObjectCategory::pedestrian:
      return "pedestrian";
    case ObjectCategory::bicycle:
      return "bicycle";
    case ObjectCategory::object:
      return "object";
  }
  return "object";
}

inline ObjectCategory object_category_from_string(const std::string & s)
{
  if (s == "vehicle") return ObjectCategory::vehicle;
  if (s == "pedestrian") return ObjectCategory::pedestrian;
  if (s == "bicycle") return ObjectCategory::bicycle;
  if (s == "object") return ObjectCategory::object;
  throw ParseError("unknown object category: " + s);
}

inline bool is_vulnerable_or_vehicle(ObjectCategory c)
{
  return c != ObjectCategory::object;
}

enum class LightState { red, yellow, green, unknown };

inline const char * to_string(LightState s)
{
  switch (s) {
    case LightState::red:
      return "red";
    case LightState::yellow:
      return "yellow";
    case LightState::green:
      return "green";
    case LightState::unknown:
      return "unknown";
  }
  return "unknown";
}

inline LightState light_state_from_string(const std::string & s)
{
  if (s == "red") return LightState::red;
  if (s == "yellow") return LightState::yellow;
  if (s == "green") return LightState::green;
  if (s == "unknown") return LightState::unknown;
  throw ParseError("unknown traffic light state: " + s);
}

struct EgoState {
  Pose2D pose;
  Vec2 velocity;      // m/s, global frame
  Vec2 acceleration;  // m/s^2, global frame
  double t{0.0};

  double speed() const { return velocity.norm(); }

  void validate() const
  {
    const bool ok = std::isfinite(pose.x) && std::isfinite(pose.y) &&
                    std::isfinite(pose.heading) && std::isfinite(velocity.x) &&
                    std::isfinite(velocity.y) && std::isfinite(acceleration.x) &&
                    std::isfinite(acceleration.y) && std::isfinite(t);
    if (!ok) {
      throw ValidationError("ego_state: all components must be finite");
    }
  }

  bool operator==(const EgoState &) const = default;
};

struct BoxSample {
  double t{0.0};
  OrientedBox box;
};

struct TrackedObject {
  std::string id;
  ObjectCategory category{ObjectCategory::object};
  std::vector<BoxSample> track;
  std::vector<Vec2> velocity;  // m/s, one per track sample

  void validate() const
  {
    if (track.empty()) {
      throw ValidationError("object " + id + ": track must be non-empty");
    }
    if (velocity.size() != track.size()) {
      throw ValidationError("object " + id + ": velocity must have one sample per track point");
    }
    for (size_t i = 0; i < track.size(); ++i) {
      if (i > 0 && track[i].t <= track[i - 1].t) {
        throw ValidationError("object " + id + ": track timestamps must be strictly increasing");
      }
      if (track[i].box.half_length <= 0.0 || track[i].box.half_width <= 0.0) {
        throw ValidationError("object " + id + ": box half-dimensions must be positive");
      }
    }
  }

  /// Box interpolated at time t; empty outside the logged span (objects only
  /// exist while their log covers them).
  std::optional<OrientedBox> box_at(double t) const
  {
    if (track.empty() || t < track.front().t - 1e-9 || t > track.back().t + 1e-9) {
      return std::nullopt;
    }
    if (track.size() == 1 || t <= track.front().t) {
      return track.front().box;
    }
    if (t >= track.back().t) {
      return track.back().box;
    }
    size_t hi = 1;
    while (hi < track.size() && track[hi].t < t) {
      ++hi;
    }
    const BoxSample & a = track[hi - 1];
    const BoxSample & b = track[hi];
    const double u = (t - a.t) / (b.t - a.t);
    OrientedBox out;
    out.center.x = a.box.center.x * (1.0 - u) + b.box.center.x * u;
    out.center.y = a.box.center.y * (1.0 - u) + b.box.center.y * u;
    out.center.heading = interpolate_heading(a.box.center.heading, b.box.center.heading, u);
    out.half_length = a.box.half_length;
    out.half_width = a.box.half_width;
    return out;
  }

  Vec2 velocity_at(double t) const
  {
    if (track.empty()) {
      return {};
    }
    size_t best = 0;
    double best_gap = std::abs(track[0].t - t);
    for (size_t i = 1; i < track.size(); ++i) {
      const double gap = std::abs(track[i].t - t);
      if (gap < best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    return velocity[best];
  }
};

struct Lane {
  std::vector<Vec2> centerline;
  double speed_limit_mps{0.0};
};

struct StopLine {
  std::string light_id;
  std::array<Vec2, 2> segment;
};

struct MapModel {
  std::vector<Polygon> drivable_area;
  std::vector<Lane> lanes;
  std::vector<StopLine> stop_lines;

  void validate() const
  {
    for (const Polygon & poly : drivable_area) {
      if (poly.vertices.size() < 3) {
        throw ValidationError("map: drivable polygon needs at least 3 vertices");
      }
      if (polygon_self_intersects(poly)) {
        throw ValidationError("map: drivable polygon is self-intersecting");
      }
    }
    for (const Lane & lane : lanes) {
      if (lane.centerline.size() < 2) {
        throw ValidationError("map: lane centerline needs at least 2 points");
      }
      if (lane.speed_limit_mps <= 0.0) {
        throw ValidationError("map: lane speed limit must be positive");
      }
    }
  }

private:
  // Proper crossing between any pair of non-adjacent edges.
  static bool polygon_self_intersects(const Polygon & poly)
  {
    const auto & v = poly.vertices;
    const size_t n = v.size();
    const auto crosses = [](const Vec2 & a, const Vec2 & b, const Vec2 & c, const Vec2 & d) {
      const auto orient = [](const Vec2 & p, const Vec2 & q, const Vec2 & r) {
        return (q - p).cross(r - p);
      };
      const double o1 = orient(a, b, c);
      const double o2 = orient(a, b, d);
      const double o3 = orient(c, d, a);
      const double o4 = orient(c, d, b);
      return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
    };
    for (size_t i = 0; i < n; ++i) {
      const size_t i2 = (i + 1) % n;
      for (size_t j = i + 1; j < n; ++j) {
        const size_t j2 = (j + 1) % n;
        if (j == i || j2 == i || j == i2) {
          continue;  // adjacent edges share an endpoint
        }
        if (crosses(v[i], v[i2], v[j], v[j2])) {
          return true;
        }
      }
    }
    return false;
  }
};

struct TrafficLightObservation {
  std::string id;
  LightState state{LightState::unknown};
  double t{0.0};
};

struct ScenarioRecord {
  std::string id;
  std::string scenario_type;
  MapModel map;
  std::vector<TrackedObject> objects;
  std::vector<TrafficLightObservation> traffic_lights;
  Trajectory ego_history;   // t <= t0, ends at t0
  EgoState ego_state;       // at t0
  Pose2D navigation_goal;
  Trajectory expert_future;  // t > t0, spans >= 3 s

  double t0() const { return ego_state.t; }
  double end_time() const { return expert_future.points.back().t; }

  void validate() const
  {
    if (id.empty()) {
      throw ValidationError("scenario: id must be non-empty");
    }
    map.validate();
    for (const TrackedObject & obj : objects) {
      obj.validate();
    }
    ego_state.validate();
    ego_history.validate("ego_history");
    expert_future.validate("expert_future");
    const double anchor = t0();
    if (std::abs(ego_history.back().t - anchor) > 1e-6) {
      throw ValidationError("scenario " + id + ": ego_history must end at t0");
    }
    if (expert_future.front().t <= anchor + 1e-12) {
      throw ValidationError("scenario " + id + ": expert_future must start after t0");
    }
    if (expert_future.back().t - anchor + 1e-9 < kMinExpertFutureSpanS) {
      throw ValidationError(
        "scenario " + id + ": expert_future must span at least 3 s after t0");
    }
  }
};

}  // namespace planprobe
