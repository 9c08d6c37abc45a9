#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "atlasbench/geometry.hpp"
#include "atlasbench/scene.hpp"

namespace atlasbench {

using Trajectory = std::array<BevPoint, kPlanLength>;

/// Values at the 1 s, 2 s and 3 s horizons plus their arithmetic mean.
struct HorizonValues {
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;
  double avg = 0.0;

  static HorizonValues from(double a, double b, double c) { return {a, b, c, (a + b + c) / 3.0}; }
};

/// stp3: mean error over all waypoints up to the horizon. at_horizon: error of the waypoint at the horizon.
enum class L2Convention { stp3, at_horizon };

/// Throws ShapeError unless both trajectories have six waypoints.
HorizonValues l2_horizons(std::span<const BevPoint> pred, std::span<const BevPoint> gt,
                          L2Convention convention = L2Convention::stp3);

/// Mean of per-sample horizon values.
HorizonValues mean_horizons(std::span<const HorizonValues> values);

struct EgoFootprint {
  double length = 4.084;
  double width = 1.85;
};

/// Headings of the ego footprint along a plan in the ego frame: the chord from the previous
/// waypoint (the origin before the first). Zero-length chords keep the previous heading,
/// starting from straight ahead.
std::array<double, kPlanLength> plan_headings(const Trajectory& plan);

/// Per-waypoint collision flags of `plan` (ego frame at `t0`) against the agents of frames
/// t0+1 .. t0+6. Throws DataError naming the frame when scene data is missing.
std::array<bool, kPlanLength> waypoint_collisions(const Trajectory& plan, const Scene& scene, int t0,
                                                  const EgoFootprint& footprint = {});

struct PlanSample {
  Trajectory plan;
  const Scene* scene = nullptr;
  int t0 = 0;
};

/// Percentage of samples colliding at any waypoint up to each horizon.
HorizonValues collision_rate(std::span<const PlanSample> samples, const EgoFootprint& footprint = {});

// ----- detection / lanes -----------------------------------------------------

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int true_positives = 0;
  int predictions = 0;
  int ground_truths = 0;
};

/// 2PR / (P + R), and 0 when P + R = 0.
double f1_from_pr(double precision, double recall);

/// Precision, recall and F1 from counts. An empty prediction set has precision 1; an empty
/// ground-truth set has recall 1.
PrecisionRecall pr_from_counts(int tp, int predictions, int ground_truths);

/// Greedy one-to-one matching: candidate pairs with distance <= threshold, sorted ascending by
/// (distance, pred index, gt index), accepted when both ends are free. Returns matched pairs.
std::vector<std::pair<int, int>> greedy_match(const std::vector<std::vector<double>>& distances, double threshold);

using Detection = std::pair<Category, BevPoint>;

/// Same-category matching by center distance.
PrecisionRecall detection_f1(std::span<const Detection> preds, std::span<const Detection> gts, double threshold);

/// Thresholds used for detection F1, meters.
inline constexpr std::array<double, 4> kDetectionThresholds{0.5, 1.0, 2.0, 4.0};
/// Thresholds averaged for lane F1, meters.
inline constexpr std::array<double, 3> kLaneThresholds{1.0, 2.0, 3.0};

using Polyline = std::vector<BevPoint>;

/// Discrete Frechet distance by dynamic programming. Throws DomainError on empty input.
double frechet(std::span<const BevPoint> a, std::span<const BevPoint> b);

/// `count` points evenly spaced by arc length, endpoints included.
Polyline resample_polyline(std::span<const BevPoint> poly, int count);

struct LaneF1 {
  std::array<PrecisionRecall, kLaneThresholds.size()> per_threshold;
  double precision = 0.0;  // means over thresholds
  double recall = 0.0;
  double f1 = 0.0;
};

/// Frechet distance of 20-point resamplings, greedy matching at 1, 2 and 3 m, averaged.
LaneF1 lane_f1(std::span<const std::array<BevPoint, 4>> preds, std::span<const std::array<BevPoint, 4>> gts);
/// Counts-only version for aggregating over many frames.
int lane_true_positives(std::span<const std::array<BevPoint, 4>> preds, std::span<const std::array<BevPoint, 4>> gts,
                        double threshold);

struct ScoredDetection {
  Category category = Category::car;
  BevPoint center;
  std::optional<double> confidence;
};

struct PrPoint {
  std::optional<double> confidence_cut;  // empty for confidence-free predictions
  double precision = 0.0;
  double recall = 0.0;
};

struct DetectionSample {
  std::vector<ScoredDetection> preds;
  std::vector<Detection> gts;
};

/// Sweeps confidence cuts (distinct values, descending). Without confidences, a single point
/// over all predictions.
std::vector<PrPoint> pr_curve(std::span<const ScoredDetection> preds, std::span<const Detection> gts, double threshold);
/// Same sweep with counts pooled over samples.
std::vector<PrPoint> pr_curve(std::span<const DetectionSample> samples, double threshold);

}  // namespace atlasbench
