#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "atlasbench/errors.hpp"
#include "atlasbench/scene_sim.hpp"

namespace atlasbench {

using nlohmann::json;

namespace {

json point_json(const BevPoint& p) { return json::array({p.x, p.y}); }

BevPoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw DataError("expected a [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json frame_json(const Frame& f) {
  json history = json::array();
  for (const auto& h : f.ego.history) history.push_back(point_json(h));
  json agents = json::array();
  for (const auto& a : f.agents) {
    agents.push_back({{"center", point_json(a.center)},
                      {"len", a.length},
                      {"wid", a.width},
                      {"heading", a.heading},
                      {"cat", to_string(a.category)},
                      {"id", a.id},
                      {"vel", point_json(a.velocity)}});
  }
  json lanes = json::array();
  for (const auto& l : f.lanes) {
    json pts = json::array();
    for (const auto& p : l.points) pts.push_back(point_json(p));
    lanes.push_back(std::move(pts));
  }
  return {{"t", f.timestamp},
          {"ego",
           {{"pos", point_json(f.ego.position)},
            {"vel", point_json(f.ego.velocity)},
            {"acc", point_json(f.ego.acceleration)},
            {"yaw", f.ego.yaw},
            {"history", std::move(history)}}},
          {"agents", std::move(agents)},
          {"lanes", std::move(lanes)},
          {"command", to_string(f.command)}};
}

Frame frame_from(const json& j) {
  Frame f;
  f.timestamp = j.at("t").get<double>();
  const json& ego = j.at("ego");
  f.ego.position = point_from(ego.at("pos"));
  f.ego.velocity = point_from(ego.at("vel"));
  f.ego.acceleration = point_from(ego.at("acc"));
  f.ego.yaw = ego.at("yaw").get<double>();
  for (const auto& h : ego.at("history")) f.ego.history.push_back(point_from(h));
  for (const auto& a : j.at("agents")) {
    AgentBox box;
    box.center = point_from(a.at("center"));
    box.length = a.at("len").get<double>();
    box.width = a.at("wid").get<double>();
    box.heading = a.at("heading").get<double>();
    const auto cat_name = a.at("cat").get<std::string>();
    const auto cat = parse_category(cat_name);
    if (!cat) throw DataError("unknown agent category '" + cat_name + "'");
    box.category = *cat;
    box.id = a.at("id").get<std::string>();
    if (a.contains("vel")) box.velocity = point_from(a.at("vel"));
    f.agents.push_back(std::move(box));
  }
  for (const auto& l : j.at("lanes")) {
    if (!l.is_array() || l.size() != 4) throw DataError("lane centerline must have exactly 4 points");
    LaneCenterline lane;
    for (int k = 0; k < 4; ++k) lane.points[k] = point_from(l[k]);
    f.lanes.push_back(lane);
  }
  const auto cmd_name = j.at("command").get<std::string>();
  const auto cmd = parse_command(cmd_name);
  if (!cmd) throw DataError("unknown command '" + cmd_name + "'");
  f.command = *cmd;
  return f;
}

}  // namespace

void write_scenes_jsonl(const std::vector<Scene>& scenes, std::ostream& out) {
  for (const auto& s : scenes) {
    json frames = json::array();
    for (const auto& f : s.frames) frames.push_back(frame_json(f));
    out << json{{"scene_id", s.id}, {"frames", std::move(frames)}}.dump() << '\n';
  }
}

std::vector<Scene> read_scenes_jsonl(std::istream& in) {
  std::vector<Scene> scenes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Scene s;
      s.id = j.contains("scene_id") ? j.at("scene_id").get<std::string>() : "scene-line-" + std::to_string(lineno);
      for (const auto& f : j.at("frames")) s.frames.push_back(frame_from(f));
      scenes.push_back(std::move(s));
    } catch (const DataError& e) {
      throw DataError(e.what(), lineno);
    } catch (const json::exception& e) {
      throw DataError(e.what(), lineno);
    }
  }
  return scenes;
}

}  // namespace atlasbench
