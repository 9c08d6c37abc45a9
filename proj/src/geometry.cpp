#include "atlasbench/geometry.hpp"

#include <algorithm>
#include <limits>

namespace atlasbench {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

Vec2 rotate_to_body(const Vec2& v, const Pose& pose) {
  // Body +y is the heading; rotating by (pi/2 - yaw) maps the heading onto +y.
  const double r = M_PI_2 - pose.yaw;
  const double c = std::cos(r);
  const double s = std::sin(r);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

BevPoint to_body_frame(const BevPoint& p, const Pose& pose) { return rotate_to_body(p - pose.position, pose); }

double heading_to_body(double heading, const Pose& pose) { return wrap_angle(heading - pose.yaw); }

std::array<BevPoint, 4> OrientedRect::corners() const {
  const Vec2 f{std::cos(heading), std::sin(heading)};
  const Vec2 l{-f.y, f.x};
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  return {center + f * hl + l * hw, center - f * hl + l * hw, center - f * hl - l * hw,
          center + f * hl - l * hw};
}

bool OrientedRect::contains(const BevPoint& p) const {
  const Vec2 d = p - center;
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double along = d.x * c + d.y * s;
  const double across = -d.x * s + d.y * c;
  return std::abs(along) <= 0.5 * length && std::abs(across) <= 0.5 * width;
}

namespace {

struct Interval {
  double lo;
  double hi;
};

Interval project(const std::array<BevPoint, 4>& pts, const Vec2& axis) {
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : pts) {
    const double d = p.x * axis.x + p.y * axis.y;
    out.lo = std::min(out.lo, d);
    out.hi = std::max(out.hi, d);
  }
  return out;
}

std::array<Vec2, 4> edge_normals(const OrientedRect& a, const OrientedRect& b) {
  return {Vec2{std::cos(a.heading), std::sin(a.heading)}, Vec2{-std::sin(a.heading), std::cos(a.heading)},
          Vec2{std::cos(b.heading), std::sin(b.heading)}, Vec2{-std::sin(b.heading), std::cos(b.heading)}};
}

}  // namespace

double rect_axis_gap(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& axis : edge_normals(a, b)) {
    const auto pa = project(ca, axis);
    const auto pb = project(cb, axis);
    best = std::max(best, std::max(pb.lo - pa.hi, pa.lo - pb.hi));
  }
  return best;
}

bool rect_intersects(const OrientedRect& a, const OrientedRect& b) { return rect_axis_gap(a, b) <= 0.0; }

}  // namespace atlasbench
