#include "atlasbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "atlasbench/errors.hpp"

namespace atlasbench {

HorizonValues l2_horizons(std::span<const BevPoint> pred, std::span<const BevPoint> gt, L2Convention convention) {
  if (pred.size() != kPlanLength || gt.size() != kPlanLength) {
    throw ShapeError("trajectories need " + std::to_string(kPlanLength) + " waypoints, got " +
                     std::to_string(pred.size()) + " and " + std::to_string(gt.size()));
  }
  std::array<double, kPlanLength> err{};
  for (int k = 0; k < kPlanLength; ++k) err[k] = distance(pred[k], gt[k]);
  auto at = [&](int n) {  // n waypoints cover the horizon
    if (convention == L2Convention::at_horizon) return err[n - 1];
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += err[k];
    return s / n;
  };
  return HorizonValues::from(at(2), at(4), at(6));
}

HorizonValues mean_horizons(std::span<const HorizonValues> values) {
  if (values.empty()) throw DomainError("no samples to average");
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& v : values) {
    a += v.h1;
    b += v.h2;
    c += v.h3;
  }
  const double n = static_cast<double>(values.size());
  return HorizonValues::from(a / n, b / n, c / n);
}

std::array<double, kPlanLength> plan_headings(const Trajectory& plan) {
  std::array<double, kPlanLength> out{};
  double heading = M_PI_2;
  BevPoint prev{0.0, 0.0};
  for (int k = 0; k < kPlanLength; ++k) {
    const Vec2 d = plan[k] - prev;
    if (d.x != 0.0 || d.y != 0.0) heading = std::atan2(d.y, d.x);
    out[k] = heading;
    prev = plan[k];
  }
  return out;
}

std::array<bool, kPlanLength> waypoint_collisions(const Trajectory& plan, const Scene& scene, int t0,
                                                  const EgoFootprint& footprint) {
  if (t0 < 0 || t0 >= static_cast<int>(scene.frames.size())) {
    throw DataError("scene '" + scene.id + "' has no frame " + std::to_string(t0));
  }
  const Pose pose = scene.frames[t0].ego.pose();
  const auto headings = plan_headings(plan);
  std::array<bool, kPlanLength> hit{};
  for (int k = 0; k < kPlanLength; ++k) {
    const int t = t0 + k + 1;
    if (t >= static_cast<int>(scene.frames.size())) {
      throw DataError("scene '" + scene.id + "' lacks agent data for frame " + std::to_string(t));
    }
    const OrientedRect ego{plan[k], footprint.length, footprint.width, headings[k]};
    for (const auto& agent : scene.frames[t].agents) {
      // Body axes are the parent axes rotated by pi/2 - yaw.
      const OrientedRect box{to_body_frame(agent.center, pose), agent.length, agent.width,
                             agent.heading + M_PI_2 - pose.yaw};
      if (rect_intersects(ego, box)) {
        hit[k] = true;
        break;
      }
    }
  }
  return hit;
}

HorizonValues collision_rate(std::span<const PlanSample> samples, const EgoFootprint& footprint) {
  if (samples.empty()) throw DomainError("no samples for collision rate");
  std::array<int, 3> colliding{};
  for (const auto& s : samples) {
    if (s.scene == nullptr) throw DataError("plan sample without scene");
    const auto hit = waypoint_collisions(s.plan, *s.scene, s.t0, footprint);
    bool any = false;
    for (int k = 0; k < kPlanLength; ++k) {
      any = any || hit[k];
      if (k % 2 == 1 && any) ++colliding[k / 2];
    }
  }
  const double n = static_cast<double>(samples.size());
  return HorizonValues::from(100.0 * colliding[0] / n, 100.0 * colliding[1] / n, 100.0 * colliding[2] / n);
}

double f1_from_pr(double precision, double recall) {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

PrecisionRecall pr_from_counts(int tp, int predictions, int ground_truths) {
  PrecisionRecall r;
  r.true_positives = tp;
  r.predictions = predictions;
  r.ground_truths = ground_truths;
  r.precision = predictions == 0 ? 1.0 : static_cast<double>(tp) / predictions;
  r.recall = ground_truths == 0 ? 1.0 : static_cast<double>(tp) / ground_truths;
  r.f1 = f1_from_pr(r.precision, r.recall);
  return r;
}

std::vector<std::pair<int, int>> greedy_match(const std::vector<std::vector<double>>& distances, double threshold) {
  std::vector<std::tuple<double, int, int>> cand;
  int n_gt = 0;
  for (int i = 0; i < static_cast<int>(distances.size()); ++i) {
    n_gt = std::max(n_gt, static_cast<int>(distances[i].size()));
    for (int j = 0; j < static_cast<int>(distances[i].size()); ++j) {
      if (distances[i][j] <= threshold) cand.emplace_back(distances[i][j], i, j);
    }
  }
  std::ranges::sort(cand);
  std::vector<bool> pred_used(distances.size(), false), gt_used(n_gt, false);
  std::vector<std::pair<int, int>> out;
  for (const auto& [d, i, j] : cand) {
    if (pred_used[i] || gt_used[j]) continue;
    pred_used[i] = gt_used[j] = true;
    out.emplace_back(i, j);
  }
  return out;
}

namespace {

constexpr double kNoMatch = std::numeric_limits<double>::infinity();

int detection_tp(std::span<const Detection> preds, std::span<const Detection> gts, double threshold) {
  std::vector<std::vector<double>> d(preds.size(), std::vector<double>(gts.size(), kNoMatch));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (preds[i].first == gts[j].first) d[i][j] = distance(preds[i].second, gts[j].second);
    }
  }
  return static_cast<int>(greedy_match(d, threshold).size());
}

}  // namespace

PrecisionRecall detection_f1(std::span<const Detection> preds, std::span<const Detection> gts, double threshold) {
  if (!(threshold > 0.0)) throw DomainError("matching threshold must be positive");
  return pr_from_counts(detection_tp(preds, gts, threshold), static_cast<int>(preds.size()),
                        static_cast<int>(gts.size()));
}

double frechet(std::span<const BevPoint> a, std::span<const BevPoint> b) {
  if (a.empty() || b.empty()) throw DomainError("Frechet distance of an empty polyline");
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> ca(n * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return ca[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = distance(a[i], b[j]);
      if (i == 0 && j == 0) at(i, j) = d;
      else if (i == 0) at(i, j) = std::max(at(0, j - 1), d);
      else if (j == 0) at(i, j) = std::max(at(i - 1, 0), d);
      else at(i, j) = std::max(std::min({at(i - 1, j), at(i - 1, j - 1), at(i, j - 1)}), d);
    }
  }
  return at(n - 1, m - 1);
}

Polyline resample_polyline(std::span<const BevPoint> poly, int count) {
  if (poly.empty()) throw DomainError("cannot resample an empty polyline");
  if (count < 2) throw DomainError("resampling needs at least 2 points");
  std::vector<double> cum(poly.size(), 0.0);
  for (std::size_t i = 1; i < poly.size(); ++i) cum[i] = cum[i - 1] + distance(poly[i - 1], poly[i]);
  const double total = cum.back();
  Polyline out;
  out.reserve(count);
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    if (total == 0.0) {
      out.push_back(poly.front());
      continue;
    }
    const double s = total * k / (count - 1);
    while (seg + 2 < poly.size() && cum[seg + 1] < s) ++seg;
    if (seg + 1 >= poly.size()) {
      out.push_back(poly.back());
      continue;
    }
    const double len = cum[seg + 1] - cum[seg];
    const double u = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back(poly[seg] + (poly[seg + 1] - poly[seg]) * u);
  }
  return out;
}

namespace {

constexpr int kLaneResample = 20;

std::vector<std::vector<double>> lane_distances(std::span<const std::array<BevPoint, 4>> preds,
                                                std::span<const std::array<BevPoint, 4>> gts) {
  std::vector<Polyline> rg;
  rg.reserve(gts.size());
  for (const auto& g : gts) rg.push_back(resample_polyline(g, kLaneResample));
  std::vector<std::vector<double>> d(preds.size(), std::vector<double>(gts.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Polyline rp = resample_polyline(preds[i], kLaneResample);
    for (std::size_t j = 0; j < gts.size(); ++j) d[i][j] = frechet(rp, rg[j]);
  }
  return d;
}

}  // namespace

int lane_true_positives(std::span<const std::array<BevPoint, 4>> preds, std::span<const std::array<BevPoint, 4>> gts,
                        double threshold) {
  return static_cast<int>(greedy_match(lane_distances(preds, gts), threshold).size());
}

LaneF1 lane_f1(std::span<const std::array<BevPoint, 4>> preds, std::span<const std::array<BevPoint, 4>> gts) {
  const auto d = lane_distances(preds, gts);
  LaneF1 out;
  for (std::size_t t = 0; t < kLaneThresholds.size(); ++t) {
    const int tp = static_cast<int>(greedy_match(d, kLaneThresholds[t]).size());
    out.per_threshold[t] = pr_from_counts(tp, static_cast<int>(preds.size()), static_cast<int>(gts.size()));
    out.precision += out.per_threshold[t].precision / kLaneThresholds.size();
    out.recall += out.per_threshold[t].recall / kLaneThresholds.size();
    out.f1 += out.per_threshold[t].f1 / kLaneThresholds.size();
  }
  return out;
}

std::vector<PrPoint> pr_curve(std::span<const DetectionSample> samples, double threshold) {
  if (!(threshold > 0.0)) throw DomainError("matching threshold must be positive");
  std::vector<double> cuts;
  bool any_conf = false;
  for (const auto& s : samples) {
    for (const auto& p : s.preds) {
      if (!p.confidence) continue;
      if (*p.confidence < 0.0 || *p.confidence > 1.0) throw DomainError("confidence outside [0, 1]");
      any_conf = true;
      cuts.push_back(*p.confidence);
    }
  }
  auto point_at = [&](std::optional<double> cut) {
    int tp = 0, np = 0, ng = 0;
    for (const auto& s : samples) {
      std::vector<Detection> kept;
      for (const auto& p : s.preds) {
        // Predictions without a score only enter once every cut is taken.
        if (!cut || p.confidence.value_or(-1.0) >= *cut) kept.emplace_back(p.category, p.center);
      }
      tp += detection_tp(kept, s.gts, threshold);
      np += static_cast<int>(kept.size());
      ng += static_cast<int>(s.gts.size());
    }
    const auto pr = pr_from_counts(tp, np, ng);
    return PrPoint{cut, pr.precision, pr.recall};
  };
  if (!any_conf) return {point_at(std::nullopt)};
  std::ranges::sort(cuts, std::greater<>());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<PrPoint> out;
  out.reserve(cuts.size());
  for (double c : cuts) out.push_back(point_at(c));
  return out;
}

std::vector<PrPoint> pr_curve(std::span<const ScoredDetection> preds, std::span<const Detection> gts, double threshold) {
  DetectionSample s{{preds.begin(), preds.end()}, {gts.begin(), gts.end()}};
  return pr_curve(std::span<const DetectionSample>(&s, 1), threshold);
}

}  // namespace atlasbench
