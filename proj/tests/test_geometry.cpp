#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "planprobe/geometry.hpp"

using namespace planprobe;

TEST_CASE("wrap_angle maps into (-pi, pi]", "[geometry]")
{
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == Catch::Approx(kPi));
  CHECK(wrap_angle(-kPi) == Catch::Approx(kPi));
  CHECK(wrap_angle(3.0 * kPi) == Catch::Approx(kPi));
  CHECK(wrap_angle(2.0 * kPi) == Catch::Approx(0.0).margin(1e-15));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> angle(-10.0, 10.0);
  std::uniform_int_distribution<int> turns(-4, 4);
  for (int i = 0; i < 200; ++i) {
    const double theta = angle(rng);
    const double w = wrap_angle(theta);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    const int k = turns(rng);
    CHECK(wrap_angle(theta + 2.0 * kPi * k) == Catch::Approx(w).margin(1e-9));
  }
}

TEST_CASE("lateral_longitudinal decomposition", "[geometry]")
{
  const Pose2D origin{0.0, 0.0, 0.0};
  SECTION("axis-aligned frame")
  {
    const auto c = lateral_longitudinal(Pose2D{3.0, 2.0, 0.0}, origin);
    CHECK(c.longitudinal == Catch::Approx(3.0));
    CHECK(c.lateral == Catch::Approx(2.0));
  }
  SECTION("frame rotated to +pi/2")
  {
    const Pose2D frame{0.0, 0.0, kPi / 2.0};
    const auto c = lateral_longitudinal(Pose2D{3.0, 2.0, 0.0}, frame);
    CHECK(c.longitudinal == Catch::Approx(2.0));
    CHECK(c.lateral == Catch::Approx(-3.0));
  }
  SECTION("point at the frame origin")
  {
    const auto c = lateral_longitudinal(origin, Pose2D{0.0, 0.0, 1.3});
    CHECK(c.longitudinal == 0.0);
    CHECK(c.lateral == 0.0);
  }
}

TEST_CASE("frame decomposition is inverse-consistent", "[geometry]")
{
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coord(-100.0, 100.0);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int i = 0; i < 300; ++i) {
    const Pose2D frame{coord(rng), coord(rng), angle(rng)};
    const Pose2D point{coord(rng), coord(rng), angle(rng)};
    const auto c = lateral_longitudinal(point, frame);
    const Vec2 back = frame_to_global(c, frame);
    CHECK(std::abs(back.x - point.x) < 1e-9);
    CHECK(std::abs(back.y - point.y) < 1e-9);
  }
}

namespace {

// Independent rectangle-overlap oracle: vertex containment plus edge
// intersection, exact for convex quads.
bool point_in_box(const Vec2 & p, const OrientedBox & box)
{
  const Vec2 d = p - box.center.position();
  return std::abs(d.dot(box.center.direction())) <= box.half_length + 1e-12 &&
         std::abs(d.dot(box.center.left())) <= box.half_width + 1e-12;
}

bool segments_intersect(const Vec2 & a, const Vec2 & b, const Vec2 & c, const Vec2 & d)
{
  const auto orient = [](const Vec2 & p, const Vec2 & q, const Vec2 & r) {
    return (q - p).cross(r - p);
  };
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

bool boxes_overlap_oracle(const OrientedBox & a, const OrientedBox & b)
{
  const auto ca = a.corners();
  const auto cb = b.corners();
  for (const Vec2 & p : ca) {
    if (point_in_box(p, b)) return true;
  }
  for (const Vec2 & p : cb) {
    if (point_in_box(p, a)) return true;
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (segments_intersect(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4])) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("oriented box overlap hand cases", "[geometry]")
{
  const OrientedBox a{{0.0, 0.0, 0.0}, 2.0, 1.0};
  CHECK(boxes_overlap(a, a));
  CHECK(boxes_overlap(a, {{3.0, 0.0, 0.0}, 2.0, 1.0}));
  CHECK_FALSE(boxes_overlap(a, {{10.0, 0.0, 0.0}, 2.0, 1.0}));
  // Touching counts as overlap.
  CHECK(boxes_overlap(a, {{4.0, 0.0, 0.0}, 2.0, 1.0}));
  // Diagonal box that clears the corner only when rotated.
  CHECK(boxes_overlap(a, {{2.5, 1.2, kPi / 4.0}, 2.0, 0.2}));
  CHECK_FALSE(boxes_overlap(a, {{3.9, 3.1, kPi / 4.0}, 2.0, 0.2}));
}

TEST_CASE("oriented box overlap agrees with the containment oracle", "[geometry]")
{
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> dim(0.2, 3.0);
  int overlaps = 0;
  for (int i = 0; i < 500; ++i) {
    const OrientedBox a{{coord(rng), coord(rng), angle(rng)}, dim(rng), dim(rng)};
    const OrientedBox b{{coord(rng), coord(rng), angle(rng)}, dim(rng), dim(rng)};
    const bool expected = boxes_overlap_oracle(a, b);
    CHECK(boxes_overlap(a, b) == expected);
    overlaps += expected;
  }
  CHECK(overlaps > 50);   // sanity: the sample exercises both outcomes
  CHECK(overlaps < 450);
}

TEST_CASE("polygon containment and union distance", "[geometry]")
{
  const Polygon square{{{0.0, 0.0}, {10.0, 0.0}, {10.0, 10.0}, {0.0, 10.0}}};
  CHECK(square.contains({5.0, 5.0}));
  CHECK_FALSE(square.contains({11.0, 5.0}));

  const std::vector<Polygon> area{square};
  CHECK(distance_to_polygon_union({5.0, 5.0}, area) == 0.0);
  CHECK(distance_to_polygon_union({12.0, 5.0}, area) == Catch::Approx(2.0));
  CHECK(distance_to_polygon_union({13.0, 14.0}, area) == Catch::Approx(5.0));

  const Polygon right{{{10.0, 0.0}, {20.0, 0.0}, {20.0, 10.0}, {10.0, 10.0}}};
  const std::vector<Polygon> both{square, right};
  CHECK(distance_to_polygon_union({15.0, 5.0}, both) == 0.0);
  CHECK(distance_to_polygon_union({22.0, 5.0}, both) == Catch::Approx(2.0));
}

TEST_CASE("polyline projection and arclength lookup", "[geometry]")
{
  const std::vector<Vec2> line{{0.0, 0.0}, {10.0, 0.0}, {10.0, 10.0}};
  const auto proj = project_to_polyline({4.0, 3.0}, line);
  CHECK(proj.arclength == Catch::Approx(4.0));
  CHECK(proj.distance == Catch::Approx(3.0));
  CHECK(proj.tangent.x == Catch::Approx(1.0));

  const auto corner = project_to_polyline({12.0, 4.0}, line);
  CHECK(corner.arclength == Catch::Approx(14.0));
  CHECK(corner.distance == Catch::Approx(2.0));
  CHECK(corner.tangent.y == Catch::Approx(1.0));

  CHECK(polyline_length(line) == Catch::Approx(20.0));
  const Vec2 p = polyline_point_at(line, 14.0);
  CHECK(p.x == Catch::Approx(10.0));
  CHECK(p.y == Catch::Approx(4.0));
  const Vec2 past = polyline_point_at(line, 50.0);
  CHECK(past.y == Catch::Approx(10.0));
}
