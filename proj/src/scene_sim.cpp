#include "atlasbench/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "atlasbench/errors.hpp"
#include "atlasbench/random.hpp"

namespace atlasbench {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "car",     "truck",      "construction_vehicle", "bus",        "trailer",
    "barrier", "motorcycle", "bicycle",              "pedestrian", "traffic_cone"};

// Sampling weight and nominal (length, width) per category.
struct CategoryProfile {
  double weight;
  double length;
  double width;
  bool can_move;
};

constexpr std::array<CategoryProfile, kCategoryCount> kProfiles = {{
    {0.34, 4.6, 1.9, true},
    {0.08, 7.0, 2.5, true},
    {0.03, 6.0, 2.8, true},
    {0.04, 11.0, 2.9, true},
    {0.03, 9.0, 2.5, true},
    {0.12, 2.0, 0.5, false},
    {0.04, 2.1, 0.8, true},
    {0.04, 1.7, 0.6, true},
    {0.16, 0.7, 0.7, true},
    {0.12, 0.4, 0.4, false},
}};

constexpr double kWorldHalfExtent = 50.0;
// Nominal ego footprint, used to keep agents off the ground-truth ego path.
constexpr double kEgoLength = 4.084;
constexpr double kEgoWidth = 1.85;
constexpr double kClearance = 1.0;

int sample_weighted(Rng& rng, const double* weights, int n) {
  const double total = std::accumulate(weights, weights + n, 0.0);
  double u = rng.uniform() * total;
  for (int i = 0; i < n; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return n - 1;
}

bool inside_world(const OrientedRect& r) {
  return std::ranges::all_of(r.corners(), [](const BevPoint& p) {
    return std::abs(p.x) <= kWorldHalfExtent && std::abs(p.y) <= kWorldHalfExtent;
  });
}

struct EgoMotion {
  double speed0;
  double accel;
  double turn_rate;
  double yaw0;

  double speed(double t) const { return speed0 + accel * t; }
  double yaw(double t) const { return yaw0 + turn_rate * t; }

  Vec2 velocity_at(double t) const { return Vec2{std::cos(yaw(t)), std::sin(yaw(t))} * speed(t); }

  /// Displacement from the start after t seconds.
  Vec2 displacement(double t) const {
    if (t == 0.0) return {};
    if (turn_rate == 0.0) {
      const double s = speed0 * t + 0.5 * accel * t * t;
      return Vec2{std::cos(yaw0), std::sin(yaw0)} * s;
    }
    // Composite Simpson on the velocity; the integrand is smooth so 256 panels are far below 1e-9 m.
    constexpr int kPanels = 256;
    const double h = t / kPanels;
    Vec2 acc = velocity_at(0.0) + velocity_at(t);
    for (int i = 1; i < kPanels; ++i) acc = acc + velocity_at(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * (h / 3.0);
  }

  Vec2 acceleration_at(double t) const {
    const double y = yaw(t);
    const Vec2 fwd{std::cos(y), std::sin(y)};
    const Vec2 left{-fwd.y, fwd.x};
    return fwd * accel + left * (speed(t) * turn_rate);
  }
};

std::vector<LaneCenterline> make_lanes(LaneLayout layout, const Pose& start, Rng& rng) {
  std::vector<LaneCenterline> lanes;
  if (layout == LaneLayout::none) return lanes;
  const Vec2 fwd{std::cos(start.yaw), std::sin(start.yaw)};
  const Vec2 right{fwd.y, -fwd.x};
  auto add_piece = [&](BevPoint origin, Vec2 dir, double spacing) {
    LaneCenterline lane;
    for (int k = 0; k < 4; ++k) lane.points[k] = origin + dir * (spacing * k);
    const bool inside = std::ranges::all_of(lane.points, [](const BevPoint& p) {
      return std::abs(p.x) <= kWorldHalfExtent && std::abs(p.y) <= kWorldHalfExtent;
    });
    if (inside) lanes.push_back(lane);
  };
  for (double offset : {-3.5, 0.0, 3.5}) {
    for (int piece = 0; piece < 3; ++piece) {
      const BevPoint origin = start.position + right * offset + fwd * (-10.0 + 30.0 * piece);
      add_piece(origin, fwd, 10.0);
    }
  }
  if (layout == LaneLayout::crossing) {
    const double ahead = rng.uniform(15.0, 35.0);
    for (double offset : {-1.75, 1.75}) {
      const BevPoint center = start.position + fwd * (ahead + offset);
      const Vec2 dir = offset < 0 ? right : right * -1.0;
      add_piece(center - dir * 15.0, dir, 10.0);
    }
  }
  return lanes;
}

}  // namespace

std::string_view to_string(Category c) { return kCategoryNames[static_cast<int>(c)]; }

const std::array<std::string_view, kCategoryCount>& category_names() { return kCategoryNames; }

std::optional<Category> parse_category(std::string_view name) {
  for (int i = 0; i < kCategoryCount; ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::go_straight: return "go_straight";
    case Command::turn_left: return "turn_left";
    case Command::turn_right: return "turn_right";
  }
  return "go_straight";
}

std::optional<Command> parse_command(std::string_view name) {
  if (name == "go_straight") return Command::go_straight;
  if (name == "turn_left") return Command::turn_left;
  if (name == "turn_right") return Command::turn_right;
  return std::nullopt;
}

void SceneConfig::validate() const {
  if (num_frames < kHistoryLength + 1 + kPlanLength) {
    throw ConfigError("num_frames must be at least 10, got " + std::to_string(num_frames));
  }
  if (min_agents < 0 || max_agents < min_agents) {
    throw ConfigError("agent count range must satisfy 0 <= min_agents <= max_agents");
  }
  if (ego_speed_min < 0.0 || ego_speed_max < ego_speed_min) {
    throw ConfigError("ego speed range must satisfy 0 <= min <= max");
  }
  if (ego_accel_max < 0.0 || turn_rate_min < 0.0 || turn_rate_max < turn_rate_min || agent_speed_max < 0.0) {
    throw ConfigError("kinematic limits must be non-negative ranges");
  }
  if (static_fraction < 0.0 || static_fraction > 1.0 || turning_fraction < 0.0 || turning_fraction > 1.0) {
    throw ConfigError("fractions must lie in [0, 1]");
  }
  if (std::ranges::any_of(command_weights, [](double w) { return w < 0.0; }) ||
      command_weights[0] + command_weights[1] + command_weights[2] <= 0.0) {
    throw ConfigError("command weights must be non-negative with a positive sum");
  }
}

AgentBox agent_at(const AgentTrack& track, double dt) {
  AgentBox box = track.initial;
  const Vec2 v = track.initial.velocity;
  if (track.turn_rate == 0.0) {
    box.center = track.initial.center + v * dt;
    return box;
  }
  const double speed = std::hypot(v.x, v.y);
  const double h0 = std::atan2(v.y, v.x);
  const double w = track.turn_rate;
  const double h1 = h0 + w * dt;
  box.center = track.initial.center + Vec2{std::sin(h1) - std::sin(h0), std::cos(h0) - std::cos(h1)} * (speed / w);
  box.heading = wrap_angle(track.initial.heading + w * dt);
  box.velocity = Vec2{std::cos(h1), std::sin(h1)} * speed;
  return box;
}

Scene generate_scene(std::uint64_t seed, const SceneConfig& config) {
  config.validate();
  Rng rng(mix64(seed, 0x5ce9e));
  const int n = config.num_frames;
  const double horizon = (n - 1) * kFrameDt;

  Scene scene;
  scene.id = "scene-" + std::to_string(seed);

  const auto command = static_cast<Command>(sample_weighted(rng, config.command_weights.data(), 3));
  EgoMotion ego{};
  ego.speed0 = rng.uniform(config.ego_speed_min, config.ego_speed_max);
  ego.accel = rng.uniform(-config.ego_accel_max, config.ego_accel_max);
  ego.accel = std::max(ego.accel, -ego.speed0 / horizon);
  const double turn = rng.uniform(config.turn_rate_min, config.turn_rate_max);
  ego.turn_rate = command == Command::turn_left ? turn : command == Command::turn_right ? -turn : 0.0;
  ego.yaw0 = M_PI_2 + rng.uniform(-0.05, 0.05);

  std::vector<Vec2> path(n);
  for (int i = 0; i < n; ++i) path[i] = ego.displacement(i * kFrameDt);

  // Center the ego path in the world with some jitter, keeping the whole footprint inside.
  double min_x = path[0].x, max_x = path[0].x, min_y = path[0].y, max_y = path[0].y;
  for (const auto& p : path) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double margin = 0.5 * std::hypot(kEgoLength, kEgoWidth);
  const double slack_x = kWorldHalfExtent - margin - 0.5 * (max_x - min_x);
  const double slack_y = kWorldHalfExtent - margin - 0.5 * (max_y - min_y);
  if (slack_x < 0.0 || slack_y < 0.0) {
    throw ConfigError("ego path does not fit in the [-50, 50] m world; lower ego_speed_max or num_frames");
  }
  const Vec2 shift{-0.5 * (min_x + max_x) + rng.uniform(-1.0, 1.0) * std::min(slack_x, 5.0),
                   -0.5 * (min_y + max_y) + rng.uniform(-1.0, 1.0) * std::min(slack_y, 5.0)};
  for (auto& p : path) p = p + shift;

  std::vector<Pose> ego_poses(n);
  for (int i = 0; i < n; ++i) ego_poses[i] = {path[i], wrap_angle(ego.yaw(i * kFrameDt))};

  // Agents: rejection-sample tracks that stay in the world and clear the ego path.
  std::vector<AgentTrack> tracks;
  const int agent_count = rng.uniform_int(config.min_agents, config.max_agents);
  std::array<double, kCategoryCount> weights{};
  for (int c = 0; c < kCategoryCount; ++c) weights[c] = kProfiles[c].weight;
  for (int a = 0; a < agent_count; ++a) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto cat = static_cast<Category>(sample_weighted(rng, weights.data(), kCategoryCount));
      const auto& prof = kProfiles[static_cast<int>(cat)];
      AgentTrack track;
      AgentBox& box = track.initial;
      box.category = cat;
      box.length = prof.length * rng.uniform(0.9, 1.1);
      box.width = prof.width * rng.uniform(0.9, 1.1);
      const int anchor = rng.uniform_int(0, n - 1);
      box.center = path[anchor] + Vec2{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
      box.heading = rng.uniform(-M_PI, M_PI);
      if (prof.can_move && !rng.bernoulli(config.static_fraction)) {
        double speed;
        if (cat == Category::pedestrian) {
          speed = rng.uniform(0.5, 2.0);
        } else if (cat == Category::bicycle) {
          speed = rng.uniform(2.0, 6.0);
        } else {
          speed = rng.uniform(std::min(2.0, config.agent_speed_max), config.agent_speed_max);
        }
        box.velocity = Vec2{std::cos(box.heading), std::sin(box.heading)} * speed;
        if (speed > 0.0 && rng.bernoulli(config.turning_fraction)) track.turn_rate = rng.uniform(-0.3, 0.3);
      }
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        const AgentBox b = agent_at(track, i * kFrameDt);
        const OrientedRect ego_zone{path[i], kEgoLength + 2.0 * kClearance, kEgoWidth + 2.0 * kClearance,
                                    ego_poses[i].yaw};
        ok = inside_world(b.rect()) && !rect_intersects(b.rect(), ego_zone);
      }
      if (ok) {
        box.id = "a" + std::to_string(tracks.size());
        tracks.push_back(track);
        break;
      }
    }
  }

  const auto lanes = make_lanes(config.lanes, ego_poses[0], rng);

  scene.frames.resize(n);
  for (int i = 0; i < n; ++i) {
    Frame& f = scene.frames[i];
    const double t = i * kFrameDt;
    f.timestamp = t;
    f.command = command;
    f.ego.position = path[i];
    f.ego.yaw = ego_poses[i].yaw;
    f.ego.velocity = ego.velocity_at(t);
    f.ego.acceleration = ego.acceleration_at(t);
    for (int h = std::max(0, i - kHistoryLength); h < i; ++h) f.ego.history.push_back(path[h]);
    f.agents.reserve(tracks.size());
    for (const auto& tr : tracks) f.agents.push_back(agent_at(tr, t));
    f.lanes = lanes;
  }
  return scene;
}

std::vector<Scene> generate_scenes(std::uint64_t first_seed, int count, const SceneConfig& config) {
  if (count < 0) throw ConfigError("scene count must be non-negative");
  std::vector<Scene> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(generate_scene(first_seed + i, config));
  return out;
}

std::array<BevPoint, kPlanLength> ground_truth_plan(const Scene& scene, int t0) {
  const int n = static_cast<int>(scene.frames.size());
  if (t0 < 0 || t0 + kPlanLength >= n) {
    throw RangeError("frame " + std::to_string(t0) + " of scene '" + scene.id + "' has fewer than 6 future frames");
  }
  const Pose pose = scene.frames[t0].ego.pose();
  std::array<BevPoint, kPlanLength> plan;
  for (int k = 0; k < kPlanLength; ++k) plan[k] = to_body_frame(scene.frames[t0 + 1 + k].ego.position, pose);
  return plan;
}

std::vector<int> planning_frames(const Scene& scene) {
  std::vector<int> out;
  const int n = static_cast<int>(scene.frames.size());
  for (int t = kHistoryLength; t + kPlanLength < n; ++t) out.push_back(t);
  return out;
}

namespace {

template <class PointFn, class VecFn, class AngleFn>
Scene map_scene(const Scene& scene, PointFn point, VecFn vec, AngleFn angle, bool swap_turns) {
  Scene out = scene;
  for (auto& f : out.frames) {
    f.ego.position = point(f.ego.position);
    f.ego.velocity = vec(f.ego.velocity);
    f.ego.acceleration = vec(f.ego.acceleration);
    f.ego.yaw = wrap_angle(angle(f.ego.yaw));
    for (auto& h : f.ego.history) h = point(h);
    for (auto& a : f.agents) {
      a.center = point(a.center);
      a.velocity = vec(a.velocity);
      a.heading = wrap_angle(angle(a.heading));
    }
    for (auto& l : f.lanes) {
      for (auto& p : l.points) p = point(p);
    }
    if (swap_turns) {
      if (f.command == Command::turn_left) {
        f.command = Command::turn_right;
      } else if (f.command == Command::turn_right) {
        f.command = Command::turn_left;
      }
    }
  }
  return out;
}

}  // namespace

Scene mirror_x(const Scene& scene) {
  auto flip = [](const BevPoint& p) { return BevPoint{-p.x, p.y}; };
  return map_scene(scene, flip, flip, [](double a) { return M_PI - a; }, true);
}

Scene transform_scene(const Scene& scene, double angle, const Vec2& offset) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  auto rot = [c, s](const Vec2& v) { return Vec2{c * v.x - s * v.y, s * v.x + c * v.y}; };
  auto move = [rot, offset](const BevPoint& p) { return rot(p) + offset; };
  return map_scene(scene, move, rot, [angle](double a) { return a + angle; }, false);
}

void validate_scene(const Scene& scene) {
  const auto fail = [&](const std::string& what) { throw DataError("scene '" + scene.id + "': " + what); };
  if (scene.frames.size() < static_cast<std::size_t>(kHistoryLength + 1 + kPlanLength)) {
    fail("needs at least 10 frames, has " + std::to_string(scene.frames.size()));
  }
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    const Frame& f = scene.frames[i];
    if (i > 0 && std::abs(f.timestamp - scene.frames[i - 1].timestamp - kFrameDt) > 1e-6) {
      fail("frame " + std::to_string(i) + " is not 0.5 s after its predecessor");
    }
    if (f.ego.history.size() > static_cast<std::size_t>(kHistoryLength)) {
      fail("frame " + std::to_string(i) + " carries more than 3 history waypoints");
    }
    if (!(f.ego.yaw > -M_PI && f.ego.yaw <= M_PI)) fail("ego yaw outside (-pi, pi]");
    for (const auto& a : f.agents) {
      if (!(a.length > 0.0 && a.width > 0.0)) fail("agent '" + a.id + "' has non-positive size");
    }
    for (const auto& l : f.lanes) {
      for (int k = 1; k < 4; ++k) {
        if (l.points[k] == l.points[k - 1]) fail("lane with repeated consecutive points");
      }
    }
  }
}

void export_scenes(const std::vector<Scene>& scenes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_scenes_jsonl(scenes, out);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<Scene> import_scenes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_scenes_jsonl(in);
}

}  // namespace atlasbench
