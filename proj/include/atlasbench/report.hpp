#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "atlasbench/metrics.hpp"
#include "atlasbench/qa_codec.hpp"
#include "atlasbench/question_pool.hpp"

namespace atlasbench {

/// One model output. Either `answer_text` (parsed with the answer grammar) or one of the
/// pre-structured fields is set.
struct Prediction {
  std::string scene_id;
  int frame = 0;
  Task task = Task::planning;
  std::optional<std::string> answer_text;
  std::optional<ChainSpec> chain;  // planning answers; V-A-P when absent
  bool truncated = false;
  std::optional<Trajectory> waypoints;
  std::optional<std::vector<ScoredDetection>> detections;
  std::optional<std::vector<std::array<BevPoint, 4>>> lanes;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

void write_predictions_jsonl(std::span<const Prediction> preds, std::ostream& out);
/// Throws DataError naming the first malformed line.
std::vector<Prediction> read_predictions_jsonl(std::istream& in);
void export_predictions(std::span<const Prediction> preds, const std::filesystem::path& path);
std::vector<Prediction> import_predictions(const std::filesystem::path& path);

/// Planned waypoints of a planning prediction; empty when its answer text does not parse.
std::optional<Trajectory> predicted_plan(const Prediction& p);

struct EvalOptions {
  std::string method = "model";
  EgoFootprint footprint;
  L2Convention l2 = L2Convention::stp3;
};

struct MetricReport {
  std::string method;
  L2Convention l2_convention = L2Convention::stp3;
  int planning_samples = 0;
  int malformed = 0;  // answers that failed to parse, over all tasks
  int truncated = 0;
  std::optional<HorizonValues> l2;         // meters
  std::optional<HorizonValues> collision;  // percent
  int detection_samples = 0;
  std::vector<std::pair<double, PrecisionRecall>> detection_f1;  // per threshold, pooled counts
  std::vector<std::pair<double, std::vector<PrPoint>>> pr_curves;
  int lane_samples = 0;
  std::optional<LaneF1> lane_f1;
};

/// Scores every prediction against its scene. Unparseable planning answers are scored as a
/// stationary plan and counted in `malformed`. Throws DataError on an empty prediction set or
/// an unknown scene id.
MetricReport evaluate(std::span<const Prediction> preds, std::span<const Scene> scenes, const EvalOptions& options = {});

nlohmann::json to_json(const MetricReport& report);
void write_report_json(const MetricReport& report, std::ostream& out);
/// Inverse of to_json. Throws DataError on missing or mistyped fields.
MetricReport report_from_json(const nlohmann::json& j);
MetricReport read_report_json(std::istream& in);

/// `method,l2_1s,l2_2s,l2_3s,l2_avg,collision_1s,collision_2s,collision_3s,collision_avg`,
/// two decimals, one row per report with planning results.
void write_planning_csv(std::span<const MetricReport> reports, std::ostream& out);

}  // namespace atlasbench
