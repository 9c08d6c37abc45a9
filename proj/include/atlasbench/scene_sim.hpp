#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "atlasbench/scene.hpp"

namespace atlasbench {

enum class LaneLayout { none, corridor, crossing };

/// Knobs for the synthetic scene generator. Ranges are inclusive.
struct SceneConfig {
  int num_frames = 10;
  int min_agents = 6;
  int max_agents = 14;
  double ego_speed_min = 0.0;
  double ego_speed_max = 12.0;
  double ego_accel_max = 1.0;
  double turn_rate_min = 0.12;  // rad/s, magnitude for turn commands
  double turn_rate_max = 0.30;
  double agent_speed_max = 10.0;
  double static_fraction = 0.5;   // among categories that can move
  double turning_fraction = 0.3;  // among moving agents: constant turn rate instead of constant velocity
  /// Relative weights of go_straight, turn_left, turn_right.
  std::array<double, 3> command_weights{1.0, 1.0, 1.0};
  LaneLayout lanes = LaneLayout::crossing;

  /// Throws ConfigError on infeasible settings.
  void validate() const;
};

/// Kinematic description of an agent: constant velocity when `turn_rate` is zero,
/// constant speed and turn rate otherwise.
struct AgentTrack {
  AgentBox initial;
  double turn_rate = 0.0;
};

/// Agent box after `dt` seconds of motion along `track`.
AgentBox agent_at(const AgentTrack& track, double dt);

/// Deterministic for fixed (seed, config). All geometry stays within [-50, 50] m.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config = {});

/// Scene ids are "scene-<seed>" for generate_scene; this batches consecutive seeds.
std::vector<Scene> generate_scenes(std::uint64_t first_seed, int count, const SceneConfig& config = {});

/// Future ego positions at t0+0.5 .. t0+3.0 s in the ego frame at t0.
/// Throws RangeError when fewer than six frames follow t0.
std::array<BevPoint, kPlanLength> ground_truth_plan(const Scene& scene, int t0);

/// Frames with a full history and a full future plan.
std::vector<int> planning_frames(const Scene& scene);

/// Reflection x -> -x of every position, velocity and angle.
Scene mirror_x(const Scene& scene);

/// Applies the rigid motion p -> R(angle) p + offset to the whole scene.
Scene transform_scene(const Scene& scene, double angle, const Vec2& offset);

/// Structural checks: frame spacing, history ordering, lane point counts, positive box sizes.
void validate_scene(const Scene& scene);

/// One scene per line; lossless.
void write_scenes_jsonl(const std::vector<Scene>& scenes, std::ostream& out);
/// Throws DataError carrying the 1-based line number of the first malformed line.
std::vector<Scene> read_scenes_jsonl(std::istream& in);

void export_scenes(const std::vector<Scene>& scenes, const std::filesystem::path& path);
std::vector<Scene> import_scenes(const std::filesystem::path& path);

}  // namespace atlasbench
