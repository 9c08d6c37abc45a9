#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atlasbench/bev_space.hpp"
#include "atlasbench/geometry.hpp"

namespace atlasbench {

/// Time between consecutive frames, seconds.
inline constexpr double kFrameDt = 0.5;
/// Past ego waypoints carried in EgoState::history.
inline constexpr int kHistoryLength = 3;
/// Future waypoints in a plan (3 s at 0.5 s).
inline constexpr int kPlanLength = 6;

enum class Category {
  car,
  truck,
  construction_vehicle,
  bus,
  trailer,
  barrier,
  motorcycle,
  bicycle,
  pedestrian,
  traffic_cone,
};
inline constexpr int kCategoryCount = 10;

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);
/// All category names, in enum order.
const std::array<std::string_view, kCategoryCount>& category_names();

enum class Command { go_straight, turn_left, turn_right };

std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view name);

struct EgoState {
  BevPoint position;
  Vec2 velocity;       // world frame, m/s
  Vec2 acceleration;   // world frame, m/s^2
  double yaw = M_PI_2; // (-pi, pi], counter-clockwise from world +x
  std::vector<BevPoint> history;  // oldest -> newest, world frame

  Pose pose() const { return {position, yaw}; }
  friend bool operator==(const EgoState&, const EgoState&) = default;
};

struct AgentBox {
  BevPoint center;
  double length = 4.5;
  double width = 1.9;
  double heading = 0.0;
  Category category = Category::car;
  std::string id;
  Vec2 velocity;  // world frame, m/s

  OrientedRect rect() const { return {center, length, width, heading}; }
  friend bool operator==(const AgentBox&, const AgentBox&) = default;
};

struct LaneCenterline {
  std::array<BevPoint, 4> points;
  friend bool operator==(const LaneCenterline&, const LaneCenterline&) = default;
};

struct Frame {
  double timestamp = 0.0;
  EgoState ego;
  std::vector<AgentBox> agents;
  std::vector<LaneCenterline> lanes;
  Command command = Command::go_straight;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Scene {
  std::string id;
  std::vector<Frame> frames;

  friend bool operator==(const Scene&, const Scene&) = default;
};

}  // namespace atlasbench
