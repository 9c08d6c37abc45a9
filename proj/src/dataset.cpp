#include "atlasbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "atlasbench/errors.hpp"
#include "atlasbench/random.hpp"
#include "atlasbench/scene_sim.hpp"

namespace atlasbench {

using nlohmann::json;

namespace {

std::uint64_t string_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

std::string caption_answer(const Frame& frame) {
  std::map<std::string_view, int> counts;
  for (const auto& [cat, p] : detection_targets(frame)) ++counts[to_string(cat)];
  const double speed = std::hypot(frame.ego.velocity.x, frame.ego.velocity.y);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", speed);
  std::string out = "The ego vehicle is travelling at " + std::string(buf) + " m/s.";
  if (counts.empty()) return out + " No other road users are visible.";
  out += " Visible road users:";
  bool first = true;
  for (const auto& [name, n] : counts) {
    out += std::string(first ? " " : ", ") + std::to_string(n) + " " + std::string(name);
    first = false;
  }
  return out + ".";
}

}  // namespace

std::vector<int> usable_frames(const Scene& scene, Task task) {
  if (task == Task::planning) return planning_frames(scene);
  std::vector<int> all(scene.frames.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

QaPair make_pair(const Scene& scene, int frame, Task task, const DatasetOptions& options) {
  if (frame < 0 || frame >= static_cast<int>(scene.frames.size())) {
    throw RangeError("frame " + std::to_string(frame) + " outside scene '" + scene.id + "'");
  }
  const Frame& f = scene.frames[frame];
  QaPair qa;
  qa.task = task;
  qa.scene_id = scene.id;
  qa.frame = frame;
  const std::uint64_t template_seed =
      mix64(mix64(options.seed, string_hash(scene.id)), static_cast<std::uint64_t>(frame) * 8 + static_cast<int>(task));
  qa.question = build_question(task, template_seed, f.command, options.layout);
  switch (task) {
    case Task::detection: qa.answer = encode_detection_answer(detection_targets(f)); break;
    case Task::lane: qa.answer = encode_lane_answer(lane_targets(f)); break;
    case Task::planning:
      qa.answer = encode_planning_answer(planning_values(scene, frame), options.chain);
      qa.chain = options.chain;
      break;
    case Task::caption: qa.answer = caption_answer(f); break;
  }
  return qa;
}

std::vector<QaPair> build_dataset(const std::vector<Scene>& scenes, const DatasetOptions& options) {
  std::vector<QaPair> out;
  for (const auto& scene : scenes) {
    for (int t = 0; t < static_cast<int>(scene.frames.size()); ++t) {
      for (Task task : options.tasks) {
        const auto frames = usable_frames(scene, task);
        if (std::find(frames.begin(), frames.end(), t) == frames.end()) continue;
        out.push_back(make_pair(scene, t, task, options));
      }
    }
  }
  return out;
}

void write_qa_jsonl(const std::vector<QaPair>& pairs, std::ostream& out) {
  for (const auto& qa : pairs) {
    json meta = {{"scene_id", qa.scene_id}, {"frame", qa.frame}};
    meta["chain"] = qa.chain ? json(qa.chain->to_string()) : json(nullptr);
    out << json{{"task", to_string(qa.task)}, {"question", qa.question}, {"answer", qa.answer}, {"meta", meta}}.dump()
        << '\n';
  }
}

std::vector<QaPair> read_qa_jsonl(std::istream& in) {
  std::vector<QaPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      QaPair qa;
      const auto task_name = j.at("task").get<std::string>();
      const auto task = parse_task(task_name);
      if (!task) throw DataError("unknown task '" + task_name + "'");
      qa.task = *task;
      qa.question = j.at("question").get<std::string>();
      qa.answer = j.at("answer").get<std::string>();
      const json& meta = j.at("meta");
      qa.scene_id = meta.at("scene_id").get<std::string>();
      qa.frame = meta.at("frame").get<int>();
      if (meta.contains("chain") && !meta.at("chain").is_null()) {
        qa.chain = ChainSpec::parse(meta.at("chain").get<std::string>());
      }
      pairs.push_back(std::move(qa));
    } catch (const DataError& e) {
      throw DataError(e.what(), lineno);
    } catch (const ConfigError& e) {
      throw DataError(e.what(), lineno);
    } catch (const json::exception& e) {
      throw DataError(e.what(), lineno);
    }
  }
  return pairs;
}

void export_dataset(const std::vector<QaPair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_qa_jsonl(pairs, out);
}

std::vector<QaPair> import_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_qa_jsonl(in);
}

}  // namespace atlasbench
