#include <doctest.h>

#include <cmath>
#include <sstream>

#include "atlasbench/errors.hpp"
#include "atlasbench/scene_sim.hpp"

using namespace atlasbench;

namespace {

std::string dump(const std::vector<Scene>& scenes) {
  std::ostringstream out;
  write_scenes_jsonl(scenes, out);
  return out.str();
}

SceneConfig straight_config(double speed) {
  SceneConfig c;
  c.ego_speed_min = c.ego_speed_max = speed;
  c.ego_accel_max = 0.0;
  c.command_weights = {1.0, 0.0, 0.0};
  return c;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  CHECK(dump({generate_scene(0)}) == dump({generate_scene(0)}));
  CHECK(dump({generate_scene(0)}) != dump({generate_scene(1)}));
}

TEST_CASE("constant-velocity agent kinematics") {
  AgentTrack track;
  track.initial.center = {0.0, 10.0};
  track.initial.velocity = {0.0, 2.0};
  const auto box = agent_at(track, 1.5);
  CHECK(box.center.x == doctest::Approx(0.0));
  CHECK(box.center.y == doctest::Approx(13.0));
}

TEST_CASE("constant-turn-rate agents keep their speed and rotate their heading") {
  AgentTrack track;
  track.initial.center = {1.0, 2.0};
  track.initial.heading = 0.0;
  track.initial.velocity = {3.0, 0.0};
  track.turn_rate = 0.2;
  const auto box = agent_at(track, 2.0);
  CHECK(std::hypot(box.velocity.x, box.velocity.y) == doctest::Approx(3.0));
  CHECK(box.heading == doctest::Approx(0.4));
  // Closed-form circle: radius 15 around (1, 17).
  CHECK(std::hypot(box.center.x - 1.0, box.center.y - 17.0) == doctest::Approx(15.0));
}

TEST_CASE("turn_left scenes increase ego yaw, turn_right scenes decrease it") {
  SceneConfig left;
  left.command_weights = {0.0, 1.0, 0.0};
  SceneConfig right;
  right.command_weights = {0.0, 0.0, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto l = generate_scene(seed, left);
    CHECK(l.frames.front().command == Command::turn_left);
    CHECK(l.frames.back().ego.yaw > l.frames.front().ego.yaw);
    const auto r = generate_scene(seed, right);
    CHECK(r.frames.back().ego.yaw < r.frames.front().ego.yaw);
  }
}

TEST_CASE("ground truth plan of a stationary ego is the origin") {
  const auto scene = generate_scene(4, straight_config(0.0));
  for (const auto& p : ground_truth_plan(scene, 3)) {
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(0.0));
  }
}

TEST_CASE("ground truth plan of a straight 2 m/s ego") {
  const auto scene = generate_scene(5, straight_config(2.0));
  const auto plan = ground_truth_plan(scene, 3);
  for (int k = 0; k < kPlanLength; ++k) {
    CHECK(plan[k].x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(plan[k].y == doctest::Approx(k + 1.0).epsilon(1e-9));
  }
}

TEST_CASE("mirroring the scene negates plan x-coordinates") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto scene = generate_scene(seed);
    const auto a = ground_truth_plan(scene, 3);
    const auto b = ground_truth_plan(mirror_x(scene), 3);
    for (int k = 0; k < kPlanLength; ++k) {
      CHECK(b[k].x == doctest::Approx(-a[k].x).epsilon(1e-9));
      CHECK(b[k].y == doctest::Approx(a[k].y).epsilon(1e-9));
    }
  }
}

TEST_CASE("ground_truth_plan needs six future frames") {
  const auto scene = generate_scene(1);
  CHECK_THROWS_AS(ground_truth_plan(scene, 4), RangeError);
  CHECK_THROWS_AS(ground_truth_plan(scene, -1), RangeError);
  CHECK(planning_frames(scene) == std::vector<int>{3});
}

TEST_CASE("infeasible configs are rejected") {
  SceneConfig c;
  c.min_agents = -1;
  CHECK_THROWS_AS(generate_scene(0, c), ConfigError);
  SceneConfig short_scene;
  short_scene.num_frames = 9;
  CHECK_THROWS_AS(generate_scene(0, short_scene), ConfigError);
  SceneConfig too_fast;
  too_fast.ego_speed_min = too_fast.ego_speed_max = 40.0;
  CHECK_THROWS_AS(generate_scene(0, too_fast), ConfigError);
}

TEST_CASE("structural invariants over many seeds") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const auto scene = generate_scene(seed);
    REQUIRE_NOTHROW(validate_scene(scene));
    for (std::size_t t = 0; t < scene.frames.size(); ++t) {
      const auto& f = scene.frames[t];
      CHECK(f.timestamp == doctest::Approx(0.5 * t));
      // History equals the previous ego positions, oldest first.
      const auto& h = f.ego.history;
      REQUIRE(h.size() == std::min<std::size_t>(t, 3));
      for (std::size_t k = 0; k < h.size(); ++k) CHECK(h[k] == scene.frames[t - h.size() + k].ego.position);
      auto in_world = [](const BevPoint& p) { return std::abs(p.x) <= 50.0 && std::abs(p.y) <= 50.0; };
      CHECK(in_world(f.ego.position));
      for (const auto& a : f.agents) {
        for (const auto& c : a.rect().corners()) CHECK(in_world(c));
        // Geometry survives spatial binning within half a bin.
        const auto back = decode_point(encode_point(a.center));
        CHECK(std::abs(back.x - a.center.x) <= 0.05 + 1e-12);
        CHECK(std::abs(back.y - a.center.y) <= 0.05 + 1e-12);
      }
      for (const auto& l : f.lanes) {
        for (const auto& p : l.points) CHECK(in_world(p));
      }
    }
  }
}

TEST_CASE("plan of a constant-velocity ego is collinear with |v| * 0.5 spacing") {
  for (double speed : {1.0, 4.5, 11.0}) {
    const auto scene = generate_scene(9, straight_config(speed));
    const auto plan = ground_truth_plan(scene, 3);
    BevPoint prev{};
    for (const auto& p : plan) {
      CHECK(distance(p, prev) == doctest::Approx(speed * 0.5).epsilon(1e-9));
      CHECK(p.x == doctest::Approx(0.0).epsilon(1e-9));
      prev = p;
    }
  }
}

TEST_CASE("JSONL export and import are lossless") {
  const auto scenes = generate_scenes(1000, 100);
  std::stringstream buf;
  write_scenes_jsonl(scenes, buf);
  const auto back = read_scenes_jsonl(buf);
  CHECK(back == scenes);
}

TEST_CASE("empty scene file yields no scenes") {
  std::istringstream in("");
  CHECK(read_scenes_jsonl(in).empty());
}

TEST_CASE("truncated line reports its line number") {
  std::ostringstream out;
  write_scenes_jsonl(generate_scenes(0, 3), out);
  std::string text = out.str();
  const auto second_end = text.find('\n', text.find('\n') + 1);
  text.erase(second_end - 40, 40);  // chop the tail of line 2
  std::istringstream in(text);
  try {
    read_scenes_jsonl(in);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
