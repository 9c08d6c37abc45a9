#include "atlasbench/report.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

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

json prediction_json(const Prediction& p) {
  json j{{"scene_id", p.scene_id}, {"frame", p.frame}, {"task", to_string(p.task)}};
  if (p.answer_text) j["answer_text"] = *p.answer_text;
  if (p.chain) j["chain"] = p.chain->to_string();
  if (p.truncated) j["truncated"] = true;
  if (p.waypoints) {
    json w = json::array();
    for (const auto& pt : *p.waypoints) w.push_back(point_json(pt));
    j["waypoints"] = std::move(w);
  }
  if (p.detections) {
    json d = json::array();
    for (const auto& det : *p.detections) {
      json o{{"cat", to_string(det.category)}, {"center", point_json(det.center)}};
      if (det.confidence) o["confidence"] = *det.confidence;
      d.push_back(std::move(o));
    }
    j["detections"] = std::move(d);
  }
  if (p.lanes) {
    json l = json::array();
    for (const auto& lane : *p.lanes) {
      json pts = json::array();
      for (const auto& pt : lane) pts.push_back(point_json(pt));
      l.push_back(std::move(pts));
    }
    j["lanes"] = std::move(l);
  }
  return j;
}

Prediction prediction_from(const json& j) {
  Prediction p;
  p.scene_id = j.at("scene_id").get<std::string>();
  p.frame = j.at("frame").get<int>();
  const auto task = parse_task(j.at("task").get<std::string>());
  if (!task) throw DataError("unknown task '" + j.at("task").get<std::string>() + "'");
  p.task = *task;
  if (j.contains("answer_text")) p.answer_text = j.at("answer_text").get<std::string>();
  if (j.contains("chain")) {
    try {
      p.chain = ChainSpec::parse(j.at("chain").get<std::string>());
    } catch (const ConfigError& e) {
      throw DataError(e.what());
    }
  }
  p.truncated = j.value("truncated", false);
  if (j.contains("waypoints")) {
    const auto& w = j.at("waypoints");
    if (!w.is_array() || w.size() != kPlanLength) throw DataError("waypoints must hold 6 points");
    Trajectory t;
    for (int k = 0; k < kPlanLength; ++k) t[k] = point_from(w[k]);
    p.waypoints = t;
  }
  if (j.contains("detections")) {
    std::vector<ScoredDetection> d;
    for (const auto& o : j.at("detections")) {
      const auto cat = parse_category(o.at("cat").get<std::string>());
      if (!cat) throw DataError("unknown category '" + o.at("cat").get<std::string>() + "'");
      ScoredDetection s{*cat, point_from(o.at("center")), std::nullopt};
      if (o.contains("confidence")) s.confidence = o.at("confidence").get<double>();
      d.push_back(s);
    }
    p.detections = std::move(d);
  }
  if (j.contains("lanes")) {
    std::vector<std::array<BevPoint, 4>> lanes;
    for (const auto& l : j.at("lanes")) {
      if (!l.is_array() || l.size() != 4) throw DataError("lanes must hold 4 points");
      std::array<BevPoint, 4> pts;
      for (int k = 0; k < 4; ++k) pts[k] = point_from(l[k]);
      lanes.push_back(pts);
    }
    p.lanes = std::move(lanes);
  }
  if (!p.answer_text && !p.waypoints && !p.detections && !p.lanes) {
    throw DataError("prediction has neither answer_text nor structured output");
  }
  return p;
}

}  // namespace

void write_predictions_jsonl(std::span<const Prediction> preds, std::ostream& out) {
  for (const auto& p : preds) out << prediction_json(p).dump() << '\n';
}

std::vector<Prediction> read_predictions_jsonl(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(prediction_from(json::parse(line)));
    } catch (const DataError& e) {
      throw DataError(e.what(), lineno);
    } catch (const json::exception& e) {
      throw DataError(e.what(), lineno);
    }
  }
  return out;
}

void export_predictions(std::span<const Prediction> preds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_predictions_jsonl(preds, out);
}

std::vector<Prediction> import_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_predictions_jsonl(in);
}

std::optional<Trajectory> predicted_plan(const Prediction& p) {
  if (p.waypoints) return *p.waypoints;
  if (!p.answer_text) return Trajectory{};
  const auto parsed = parse_planning_answer(*p.answer_text, p.chain.value_or(ChainSpec()));
  if (!parsed) return std::nullopt;
  return parsed.value().decoded_waypoints();
}

MetricReport evaluate(std::span<const Prediction> preds, std::span<const Scene> scenes, const EvalOptions& options) {
  if (preds.empty()) throw DataError("no predictions to evaluate");
  std::unordered_map<std::string, const Scene*> by_id;
  for (const auto& s : scenes) by_id.emplace(s.id, &s);
  auto scene_of = [&](const Prediction& p) -> const Scene& {
    auto it = by_id.find(p.scene_id);
    if (it == by_id.end()) throw DataError("prediction refers to unknown scene '" + p.scene_id + "'");
    if (p.frame < 0 || p.frame >= static_cast<int>(it->second->frames.size())) {
      throw DataError("scene '" + p.scene_id + "' has no frame " + std::to_string(p.frame));
    }
    return *it->second;
  };

  MetricReport r;
  r.method = options.method;
  r.l2_convention = options.l2;
  std::vector<HorizonValues> l2;
  std::vector<PlanSample> plans;
  std::vector<DetectionSample> det;
  std::array<int, kLaneThresholds.size()> lane_tp{};
  int lane_pred = 0, lane_gt = 0;

  for (const auto& p : preds) {
    const Scene& scene = scene_of(p);
    r.truncated += p.truncated;
    switch (p.task) {
      case Task::planning: {
        const auto decoded = predicted_plan(p);
        if (!decoded) ++r.malformed;
        const Trajectory plan = decoded.value_or(Trajectory{});  // stationary fallback
        Trajectory gt;
        try {
          gt = ground_truth_plan(scene, p.frame);
        } catch (const RangeError& e) {
          throw DataError(e.what());
        }
        l2.push_back(l2_horizons(plan, gt, options.l2));
        plans.push_back({plan, &scene, p.frame});
        break;
      }
      case Task::detection: {
        DetectionSample s;
        s.gts = detection_targets(scene.frames[p.frame]);
        if (p.detections) {
          s.preds = *p.detections;
        } else if (p.answer_text) {
          const auto parsed = parse_detection_answer(*p.answer_text);
          if (parsed) {
            for (const auto& [cat, pt] : decode_detections(parsed.value())) s.preds.push_back({cat, pt, std::nullopt});
          } else {
            ++r.malformed;
          }
        }
        det.push_back(std::move(s));
        break;
      }
      case Task::lane: {
        std::vector<std::array<BevPoint, 4>> lanes;
        if (p.lanes) {
          lanes = *p.lanes;
        } else if (p.answer_text) {
          const auto parsed = parse_lane_answer(*p.answer_text);
          if (parsed) lanes = decode_lanes(parsed.value());
          else ++r.malformed;
        }
        const auto gts = lane_targets(scene.frames[p.frame]);
        for (std::size_t t = 0; t < kLaneThresholds.size(); ++t) {
          lane_tp[t] += lane_true_positives(lanes, gts, kLaneThresholds[t]);
        }
        lane_pred += static_cast<int>(lanes.size());
        lane_gt += static_cast<int>(gts.size());
        ++r.lane_samples;
        break;
      }
      case Task::caption: break;
    }
  }

  r.planning_samples = static_cast<int>(plans.size());
  if (!plans.empty()) {
    r.l2 = mean_horizons(l2);
    r.collision = collision_rate(plans, options.footprint);
  }
  r.detection_samples = static_cast<int>(det.size());
  if (!det.empty()) {
    for (double thr : kDetectionThresholds) {
      int tp = 0, np = 0, ng = 0;
      for (const auto& s : det) {
        std::vector<Detection> plain;
        for (const auto& d : s.preds) plain.emplace_back(d.category, d.center);
        tp += detection_f1(plain, s.gts, thr).true_positives;
        np += static_cast<int>(plain.size());
        ng += static_cast<int>(s.gts.size());
      }
      r.detection_f1.emplace_back(thr, pr_from_counts(tp, np, ng));
      r.pr_curves.emplace_back(thr, pr_curve(std::span<const DetectionSample>(det), thr));
    }
  }
  if (r.lane_samples > 0) {
    LaneF1 lf;
    for (std::size_t t = 0; t < kLaneThresholds.size(); ++t) {
      lf.per_threshold[t] = pr_from_counts(lane_tp[t], lane_pred, lane_gt);
      lf.precision += lf.per_threshold[t].precision / kLaneThresholds.size();
      lf.recall += lf.per_threshold[t].recall / kLaneThresholds.size();
      lf.f1 += lf.per_threshold[t].f1 / kLaneThresholds.size();
    }
    r.lane_f1 = lf;
  }
  return r;
}

namespace {

json horizons_json(const HorizonValues& h) { return {{"1s", h.h1}, {"2s", h.h2}, {"3s", h.h3}, {"avg", h.avg}}; }

json pr_json(const PrecisionRecall& p) {
  return {{"precision", p.precision}, {"recall", p.recall},           {"f1", p.f1},
          {"tp", p.true_positives},   {"predictions", p.predictions}, {"ground_truths", p.ground_truths}};
}

}  // namespace

json to_json(const MetricReport& r) {
  json j{{"method", r.method},
         {"l2_convention", r.l2_convention == L2Convention::stp3 ? "stp3" : "at-horizon"},
         {"planning_samples", r.planning_samples},
         {"detection_samples", r.detection_samples},
         {"lane_samples", r.lane_samples},
         {"malformed", r.malformed},
         {"truncated", r.truncated}};
  j["l2"] = r.l2 ? horizons_json(*r.l2) : json(nullptr);
  j["collision"] = r.collision ? horizons_json(*r.collision) : json(nullptr);
  json det = json::array();
  for (const auto& [thr, pr] : r.detection_f1) {
    json row = pr_json(pr);
    row["threshold"] = thr;
    det.push_back(std::move(row));
  }
  j["detection_f1"] = std::move(det);
  json curves = json::array();
  for (const auto& [thr, pts] : r.pr_curves) {
    json c = json::array();
    for (const auto& p : pts) {
      c.push_back({{"confidence_cut", p.confidence_cut ? json(*p.confidence_cut) : json(nullptr)},
                   {"precision", p.precision},
                   {"recall", p.recall}});
    }
    curves.push_back({{"threshold", thr}, {"points", std::move(c)}});
  }
  j["pr_curves"] = std::move(curves);
  if (r.lane_f1) {
    json per = json::array();
    for (std::size_t t = 0; t < kLaneThresholds.size(); ++t) {
      json row = pr_json(r.lane_f1->per_threshold[t]);
      row["threshold"] = kLaneThresholds[t];
      per.push_back(std::move(row));
    }
    j["lane_f1"] = {{"precision", r.lane_f1->precision},
                    {"recall", r.lane_f1->recall},
                    {"f1", r.lane_f1->f1},
                    {"per_threshold", std::move(per)}};
  } else {
    j["lane_f1"] = nullptr;
  }
  return j;
}

void write_report_json(const MetricReport& report, std::ostream& out) { out << to_json(report).dump(2) << '\n'; }

namespace {

HorizonValues horizons_from(const json& j) {
  return {j.at("1s").get<double>(), j.at("2s").get<double>(), j.at("3s").get<double>(), j.at("avg").get<double>()};
}

PrecisionRecall pr_from(const json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(),      j.at("f1").get<double>(),
          j.at("tp").get<int>(),           j.at("predictions").get<int>(), j.at("ground_truths").get<int>()};
}

}  // namespace

MetricReport report_from_json(const json& j) {
  try {
    MetricReport r;
    r.method = j.at("method").get<std::string>();
    const auto conv = j.at("l2_convention").get<std::string>();
    if (conv == "stp3") r.l2_convention = L2Convention::stp3;
    else if (conv == "at-horizon") r.l2_convention = L2Convention::at_horizon;
    else throw DataError("unknown l2_convention '" + conv + "'");
    r.planning_samples = j.at("planning_samples").get<int>();
    r.detection_samples = j.at("detection_samples").get<int>();
    r.lane_samples = j.at("lane_samples").get<int>();
    r.malformed = j.at("malformed").get<int>();
    r.truncated = j.at("truncated").get<int>();
    if (!j.at("l2").is_null()) r.l2 = horizons_from(j.at("l2"));
    if (!j.at("collision").is_null()) r.collision = horizons_from(j.at("collision"));
    for (const auto& row : j.at("detection_f1")) r.detection_f1.emplace_back(row.at("threshold").get<double>(), pr_from(row));
    for (const auto& c : j.at("pr_curves")) {
      std::vector<PrPoint> pts;
      for (const auto& p : c.at("points")) {
        PrPoint pt{std::nullopt, p.at("precision").get<double>(), p.at("recall").get<double>()};
        if (!p.at("confidence_cut").is_null()) pt.confidence_cut = p.at("confidence_cut").get<double>();
        pts.push_back(pt);
      }
      r.pr_curves.emplace_back(c.at("threshold").get<double>(), std::move(pts));
    }
    if (!j.at("lane_f1").is_null()) {
      const auto& l = j.at("lane_f1");
      LaneF1 lf;
      const auto& per = l.at("per_threshold");
      if (per.size() != lf.per_threshold.size()) throw DataError("lane_f1 needs one row per lane threshold");
      for (std::size_t t = 0; t < per.size(); ++t) lf.per_threshold[t] = pr_from(per[t]);
      lf.precision = l.at("precision").get<double>();
      lf.recall = l.at("recall").get<double>();
      lf.f1 = l.at("f1").get<double>();
      r.lane_f1 = lf;
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed metric report: ") + e.what());
  }
}

MetricReport read_report_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("metric report is not JSON: ") + e.what());
  }
  return report_from_json(j);
}

void write_planning_csv(std::span<const MetricReport> reports, std::ostream& out) {
  out << "method,l2_1s,l2_2s,l2_3s,l2_avg,collision_1s,collision_2s,collision_3s,collision_avg\n";
  char buf[64];
  auto cell = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.2f", v);
    out << buf;
  };
  for (const auto& r : reports) {
    if (!r.l2 || !r.collision) continue;
    out << r.method;
    for (double v : {r.l2->h1, r.l2->h2, r.l2->h3, r.l2->avg}) cell(v);
    for (double v : {r.collision->h1, r.collision->h2, r.collision->h3, r.collision->avg}) cell(v);
    out << '\n';
  }
}

}  // namespace atlasbench
