#include <doctest.h>

#include <sstream>
#include <tuple>

#include "atlasbench/dataset.hpp"
#include "atlasbench/errors.hpp"
#include "atlasbench/scene_sim.hpp"

using namespace atlasbench;

TEST_CASE("planning pairs come from frames with full history and future") {
  const auto scenes = generate_scenes(1, 5);
  const auto pairs = build_dataset(scenes, {});
  REQUIRE(pairs.size() == 5);  // ten-frame scenes have exactly one planning frame
  for (const auto& p : pairs) {
    CHECK(p.task == Task::planning);
    CHECK(p.frame == 3);
    CHECK(count_slots(p.question) == 2);
    REQUIRE(p.chain.has_value());
    CHECK(parse_planning_answer(p.answer, *p.chain).ok());
  }
}

TEST_CASE("dataset building is deterministic and ordered by scene, frame, task") {
  const auto scenes = generate_scenes(40, 3);
  DatasetOptions o;
  o.tasks = {Task::detection, Task::lane, Task::planning};
  o.seed = 9;
  const auto a = build_dataset(scenes, o);
  CHECK(a == build_dataset(scenes, o));
  auto scene_rank = [&](const std::string& id) {
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      if (scenes[i].id == id) return static_cast<int>(i);
    }
    return -1;
  };
  for (std::size_t i = 1; i < a.size(); ++i) {
    const auto key = [&](const QaPair& p) { return std::tuple(scene_rank(p.scene_id), p.frame, p.task); };
    CHECK(key(a[i - 1]) < key(a[i]));
  }
  o.seed = 10;
  CHECK(a != build_dataset(scenes, o));  // template choices move with the seed
}

TEST_CASE("perception answers parse and match the frame's targets") {
  const auto scenes = generate_scenes(60, 2);
  DatasetOptions o;
  o.tasks = {Task::detection, Task::lane};
  for (const auto& p : build_dataset(scenes, o)) {
    const Scene& s = p.scene_id == scenes[0].id ? scenes[0] : scenes[1];
    if (p.task == Task::detection) {
      const auto r = parse_detection_answer(p.answer);
      REQUIRE(r.ok());
      CHECK(r.value().objects.size() == detection_targets(s.frames[p.frame]).size());
    } else {
      const auto r = parse_lane_answer(p.answer);
      REQUIRE(r.ok());
      CHECK(r.value().lanes.size() == lane_targets(s.frames[p.frame]).size());
    }
  }
}

TEST_CASE("chain option shapes planning answers") {
  const auto scenes = generate_scenes(70, 2);
  DatasetOptions o;
  o.chain = ChainSpec::parse("P-V-A");
  for (const auto& p : build_dataset(scenes, o)) {
    CHECK(p.answer.starts_with("WP "));
    CHECK(*p.chain == o.chain);
  }
}

TEST_CASE("per-view layout puts six slots in perception questions") {
  const auto scenes = generate_scenes(80, 1);
  DatasetOptions o;
  o.tasks = {Task::detection};
  o.layout = SlotLayout::per_view;
  for (const auto& p : build_dataset(scenes, o)) CHECK(count_slots(p.question) == 6);
}

TEST_CASE("QA JSONL round trip") {
  const auto scenes = generate_scenes(90, 4);
  DatasetOptions o;
  o.tasks = {Task::detection, Task::lane, Task::planning, Task::caption};
  const auto pairs = build_dataset(scenes, o);
  std::stringstream ss;
  write_qa_jsonl(pairs, ss);
  CHECK(read_qa_jsonl(ss) == pairs);
}

TEST_CASE("QA JSONL errors carry line numbers") {
  std::stringstream ss;
  ss << R"({"task":"planning","question":"q","answer":"a","meta":{"scene_id":"s","frame":3,"chain":"V-A-P"}})" << "\n";
  ss << R"({"task":"juggling","question":"q","answer":"a","meta":{"scene_id":"s","frame":3,"chain":null}})" << "\n";
  try {
    read_qa_jsonl(ss);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}
