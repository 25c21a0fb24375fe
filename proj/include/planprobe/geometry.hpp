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
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace planprobe {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi]; inputs landing exactly on -pi map to +pi.
inline double wrap_angle(double theta)
{
  double w = std::remainder(theta, 2.0 * kPi);
  if (w <= -kPi) {
    w += 2.0 * kPi;
  }
  return w;
}

struct Vec2 {
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 & operator+=(const Vec2 & o)
  {
    x += o.x;
    y += o.y;
    return *this;
  }

  double dot(const Vec2 & o) const { return x * o.x + y * o.y; }
  double cross(const Vec2 & o) const { return x * o.y - y * o.x; }
  double norm_sq() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
  Vec2 perp_left() const { return {-y, x}; }

  Vec2 normalized() const
  {
    const double n = norm();
    if (n <= 0.0) {
      return {0.0, 0.0};
    }
    return {x / n, y / n};
  }

  bool operator==(const Vec2 &) const = default;
};

inline Vec2 operator*(double s, const Vec2 & v)
{
  return v * s;
}

inline Vec2 rotate(const Vec2 & v, double angle)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct Pose2D {
  double x{0.0};
  double y{0.0};
  double heading{0.0};  // wrapped to (-pi, pi]

  Pose2D() = default;
  Pose2D(double x_, double y_, double heading_) : x(x_), y(y_), heading(wrap_angle(heading_)) {}

  Vec2 position() const { return {x, y}; }
  Vec2 direction() const { return {std::cos(heading), std::sin(heading)}; }
  Vec2 left() const { return {-std::sin(heading), std::cos(heading)}; }

  bool operator==(const Pose2D &) const = default;
};

struct FrameCoords {
  double longitudinal{0.0};
  double lateral{0.0};  // positive to the left of the frame heading
};

/// Decomposes `point` relative to `frame`: longitudinal along the frame
/// heading, lateral signed positive to the left of it.
inline FrameCoords lateral_longitudinal(const Pose2D & point, const Pose2D & frame)
{
  const Vec2 d = point.position() - frame.position();
  return {d.dot(frame.direction()), d.dot(frame.left())};
}

inline Vec2 frame_to_global(const FrameCoords & c, const Pose2D & frame)
{
  return frame.position() + frame.direction() * c.longitudinal + frame.left() * c.lateral;
}

/// Shortest-arc interpolation between two headings; u in [0, 1]. A separation
/// of exactly pi resolves toward the +pi arc.
inline double interpolate_heading(double from, double to, double u)
{
  return wrap_angle(from + u * wrap_angle(to - from));
}

/// Absolute heading difference wrapped into [0, pi].
inline double heading_distance(double a, double b)
{
  return std::abs(wrap_angle(a - b));
}

struct OrientedBox {
  Pose2D center;
  double half_length{0.0};  // along the heading
  double half_width{0.0};

  std::array<Vec2, 4> corners() const
  {
    const Vec2 u = center.direction() * half_length;
    const Vec2 v = center.left() * half_width;
    const Vec2 c = center.position();
    return {c + u + v, c + u - v, c - u - v, c - u + v};
  }
};

/// Separating-axis overlap test for two oriented rectangles. Touching
/// boundaries count as overlap.
inline bool boxes_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const Vec2 d = b.center.position() - a.center.position();
  const std::array<Vec2, 4> axes = {a.center.direction(), a.center.left(), b.center.direction(),
                                    b.center.left()};
  for (const Vec2 & axis : axes) {
    const double ra = a.half_length * std::abs(axis.dot(a.center.direction())) +
                      a.half_width * std::abs(axis.dot(a.center.left()));
    const double rb = b.half_length * std::abs(axis.dot(b.center.direction())) +
                      b.half_width * std::abs(axis.dot(b.center.left()));
    if (std::abs(axis.dot(d)) > ra + rb) {
      return false;
    }
  }
  return true;
}

inline double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const Vec2 ab = b - a;
  const double len_sq = ab.norm_sq();
  if (len_sq <= 0.0) {
    return (p - a).norm();
  }
  const double u = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
  return (p - (a + ab * u)).norm();
}

/// Simple (non-self-intersecting) polygon, implicitly closed.
struct Polygon {
  std::vector<Vec2> vertices;

  /// Even-odd containment test. Points on an edge are treated as inside by
  /// the distance helpers (their edge distance is zero either way).
  bool contains(const Vec2 & p) const
  {
    bool inside = false;
    const size_t n = vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2 & vi = vertices[i];
      const Vec2 & vj = vertices[j];
      if ((vi.y > p.y) != (vj.y > p.y)) {
        const double x_cross = vj.x + (p.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
        if (p.x < x_cross) {
          inside = !inside;
        }
      }
    }
    return inside;
  }

  double boundary_distance(const Vec2 & p) const
  {
    double best = std::numeric_limits<double>::infinity();
    const size_t n = vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
      best = std::min(best, point_segment_distance(p, vertices[j], vertices[i]));
    }
    return best;
  }
};

/// Distance from a point to the union of polygons: zero inside any polygon,
/// otherwise the minimum distance to any boundary.
inline double distance_to_polygon_union(const Vec2 & p, std::span<const Polygon> polygons)
{
  double best = std::numeric_limits<double>::infinity();
  for (const Polygon & poly : polygons) {
    if (poly.contains(p)) {
      return 0.0;
    }
    best = std::min(best, poly.boundary_distance(p));
  }
  return best;
}

struct PolylineProjection {
  double arclength{0.0};  // along the polyline to the projected point
  double distance{0.0};   // from the query point to the projected point
  Vec2 point;             // projected point
  Vec2 tangent;           // unit tangent of the containing segment
};

inline double polyline_length(std::span<const Vec2> pts)
{
  double len = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) {
    len += (pts[i] - pts[i - 1]).norm();
  }
  return len;
}

inline PolylineProjection project_to_polyline(const Vec2 & p, std::span<const Vec2> pts)
{
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (pts.empty()) {
    return best;
  }
  if (pts.size() == 1) {
    return {0.0, (p - pts[0]).norm(), pts[0], {1.0, 0.0}};
  }
  double s_base = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 b = pts[i + 1];
    const Vec2 ab = b - a;
    const double seg_len_sq = ab.norm_sq();
    double u = 0.0;
    if (seg_len_sq > 0.0) {
      u = std::clamp((p - a).dot(ab) / seg_len_sq, 0.0, 1.0);
    }
    const Vec2 q = a + ab * u;
    const double dist = (p - q).norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.point = q;
      best.arclength = s_base + std::sqrt(seg_len_sq) * u;
      best.tangent = seg_len_sq > 0.0 ? ab.normalized() : Vec2{1.0, 0.0};
    }
    s_base += std::sqrt(seg_len_sq);
  }
  return best;
}

/// Point at a given arclength along a polyline, clamped to its span.
inline Vec2 polyline_point_at(std::span<const Vec2> pts, double s)
{
  if (pts.empty()) {
    return {};
  }
  if (s <= 0.0) {
    return pts.front();
  }
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double seg = (pts[i + 1] - pts[i]).norm();
    if (s <= seg) {
      if (seg <= 0.0) {
        return pts[i];
      }
      return pts[i] + (pts[i + 1] - pts[i]) * (s / seg);
    }
    s -= seg;
  }
  return pts.back();
}

}  // namespace planprobe
