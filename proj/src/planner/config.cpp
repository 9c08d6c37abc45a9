#include "atlasbench/planner/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "atlasbench/errors.hpp"

namespace atlasbench::planner {

void PlannerConfig::validate() const {
  if (d_q < 1 || d_llm < 1 || layers < 1 || heads < 1 || context < 2 || mlp_ratio < 1) {
    throw ConfigError("planner dimensions must be positive");
  }
  if (d_llm % heads != 0) throw ConfigError("d_llm must be divisible by heads");
  if (bin_init_scale < 0.0) throw ConfigError("bin_init_scale must be non-negative");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !(lr_scale > 0.0)) throw ConfigError("learning rate must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (warmup_fraction < 0.0 || warmup_fraction > 1.0) throw ConfigError("warmup_fraction must be in [0, 1]");
  if (grad_clip < 0.0) throw ConfigError("grad_clip must be non-negative");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
}

void RunConfig::validate() const {
  scene.validate();
  model.validate();
  train.validate();
  if (queries.dim != model.d_q) throw ConfigError("queries.dim must equal model.d_q");
  if (!(footprint.length > 0.0) || !(footprint.width > 0.0)) throw ConfigError("ego footprint must be positive");
}

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(const std::string&)>;

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    T v;
    if constexpr (std::is_same_v<T, double>) v = std::stod(text, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>) v = std::stoull(text, &used, 0);
    else if constexpr (std::is_same_v<T, std::size_t>) v = std::stoull(text, &used, 0);
    else v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("'" + key + "': cannot read '" + text + "' as a number");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + text + "'");
}

template <class T>
Setter num(T& field, const std::string& key) {
  return [&field, key](const std::string& v) { field = parse_number<T>(key, v); };
}

std::map<std::string, Setter> setters(RunConfig& c) {
  std::map<std::string, Setter> s;
  auto& sc = c.scene;
  s["scene.num_frames"] = num(sc.num_frames, "scene.num_frames");
  s["scene.min_agents"] = num(sc.min_agents, "scene.min_agents");
  s["scene.max_agents"] = num(sc.max_agents, "scene.max_agents");
  s["scene.ego_speed_min"] = num(sc.ego_speed_min, "scene.ego_speed_min");
  s["scene.ego_speed_max"] = num(sc.ego_speed_max, "scene.ego_speed_max");
  s["scene.ego_accel_max"] = num(sc.ego_accel_max, "scene.ego_accel_max");
  s["scene.turn_rate_min"] = num(sc.turn_rate_min, "scene.turn_rate_min");
  s["scene.turn_rate_max"] = num(sc.turn_rate_max, "scene.turn_rate_max");
  s["scene.agent_speed_max"] = num(sc.agent_speed_max, "scene.agent_speed_max");
  s["scene.static_fraction"] = num(sc.static_fraction, "scene.static_fraction");
  s["scene.turning_fraction"] = num(sc.turning_fraction, "scene.turning_fraction");
  s["scene.lanes"] = [&sc](const std::string& v) {
    if (v == "none") sc.lanes = LaneLayout::none;
    else if (v == "corridor") sc.lanes = LaneLayout::corridor;
    else if (v == "crossing") sc.lanes = LaneLayout::crossing;
    else throw ConfigError("'scene.lanes': expected none, corridor or crossing, got '" + v + "'");
  };

  auto& q = c.queries;
  s["queries.dim"] = num(q.dim, "queries.dim");
  s["queries.position_noise"] = num(q.position_noise, "queries.position_noise");
  s["queries.velocity_noise"] = num(q.velocity_noise, "queries.velocity_noise");
  s["queries.featurizer_seed"] = num(q.featurizer_seed, "queries.featurizer_seed");
  s["queries.memory_depth"] = num(q.memory_depth, "queries.memory_depth");
  s["queries.top_k"] = num(q.top_k, "queries.top_k");

  auto& m = c.model;
  s["model.d_q"] = num(m.d_q, "model.d_q");
  s["model.d_llm"] = num(m.d_llm, "model.d_llm");
  s["model.layers"] = num(m.layers, "model.layers");
  s["model.heads"] = num(m.heads, "model.heads");
  s["model.context"] = num(m.context, "model.context");
  s["model.mlp_ratio"] = num(m.mlp_ratio, "model.mlp_ratio");
  s["model.bin_init_scale"] = num(m.bin_init_scale, "model.bin_init_scale");
  s["model.chain"] = [&m](const std::string& v) { m.chain = ChainSpec::parse(v); };
  s["model.rp_embedding"] = [&m](const std::string& v) {
    auto e = parse_ref_embedding(v);
    if (!e) throw ConfigError("'model.rp_embedding': expected none, sincos, learned or rp, got '" + v + "'");
    m.rp_embedding = *e;
  };
  s["model.inject_queries"] = [&m](const std::string& v) { m.inject_queries = parse_bool("model.inject_queries", v); };

  auto& t = c.train;
  s["train.lr"] = num(t.lr, "train.lr");
  s["train.lr_scale"] = num(t.lr_scale, "train.lr_scale");
  s["train.weight_decay"] = num(t.weight_decay, "train.weight_decay");
  s["train.warmup_fraction"] = num(t.warmup_fraction, "train.warmup_fraction");
  s["train.grad_clip"] = num(t.grad_clip, "train.grad_clip");
  s["train.epochs"] = num(t.epochs, "train.epochs");
  s["train.seed"] = num(t.seed, "train.seed");

  s["eval.ego_length"] = num(c.footprint.length, "eval.ego_length");
  s["eval.ego_width"] = num(c.footprint.width, "eval.ego_width");
  s["eval.l2_convention"] = [&c](const std::string& v) {
    if (v == "stp3") c.l2 = L2Convention::stp3;
    else if (v == "at-horizon") c.l2 = L2Convention::at_horizon;
    else throw ConfigError("'eval.l2_convention': expected stp3 or at-horizon, got '" + v + "'");
  };
  return s;
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  const auto table = setters(c);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      auto it = table.find(name);
      if (it == table.end()) throw ConfigError("unknown config key '" + name + "'");
      it->second(value.data());
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_run_config(in);
}

}  // namespace atlasbench::planner
