#pragma once

#include <array>
#include <cmath>

#include "atlasbench/bev_space.hpp"

namespace atlasbench {

using Vec2 = BevPoint;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Planar pose in some parent frame. `yaw` is counter-clockwise from the parent +x axis.
struct Pose {
  BevPoint position;
  double yaw = M_PI_2;
};

/// Expresses a parent-frame point in the body frame of `pose`: +y along the heading, +x to its right.
BevPoint to_body_frame(const BevPoint& p, const Pose& pose);
/// Rotates a parent-frame direction vector into the body frame of `pose`.
Vec2 rotate_to_body(const Vec2& v, const Pose& pose);
/// Heading of a parent-frame direction expressed in the body frame (0 rad means forward, +y).
double heading_to_body(double heading, const Pose& pose);

/// Rectangle with `length` along the heading and `width` across it.
struct OrientedRect {
  BevPoint center;
  double length = 1.0;
  double width = 1.0;
  double heading = 0.0;

  std::array<BevPoint, 4> corners() const;
  bool contains(const BevPoint& p) const;
};

/// Separating-axis test over the four edge normals. Touching edges count as intersecting.
bool rect_intersects(const OrientedRect& a, const OrientedRect& b);

/// Largest gap between the projections of `a` and `b` over the four edge normals.
/// Positive: separated by at least that much along some axis. Negative: minimum penetration depth.
double rect_axis_gap(const OrientedRect& a, const OrientedRect& b);

}  // namespace atlasbench
