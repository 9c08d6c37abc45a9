#include "atlasbench/query_generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "atlasbench/errors.hpp"
#include "atlasbench/geometry.hpp"
#include "atlasbench/random.hpp"

namespace atlasbench {

namespace {

std::uint64_t id_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, scale);
  }
  return m;
}

}  // namespace

QueryGenerator::QueryGenerator(QueryGeneratorConfig config) : config_(config) {
  if (config_.dim < 1) throw ConfigError("query dimension must be positive");
  if (config_.position_noise < 0.0 || config_.velocity_noise < 0.0) throw ConfigError("noise must be non-negative");
  Rng rng(mix64(config_.featurizer_seed, 0xfea7));
  detection_featurizer_ = random_matrix(rng, config_.dim, kDetectionFeatures);
  map_featurizer_ = random_matrix(rng, config_.dim, kMapFeatures);
}

std::vector<QueryToken> QueryGenerator::detection_queries(const Scene& scene, int t) const {
  if (t < 0 || t >= static_cast<int>(scene.frames.size())) throw RangeError("frame outside scene '" + scene.id + "'");
  const Frame& frame = scene.frames[t];
  const Pose pose = frame.ego.pose();
  Rng rng(mix64(mix64(id_hash(scene.id), static_cast<std::uint64_t>(t)), 0xde7));
  std::vector<QueryToken> out;
  for (const auto& agent : frame.agents) {
    const BevPoint p = to_body_frame(agent.center, pose);
    // What a detector mounted on the ego reports: relative position and velocity.
    const Vec2 v = rotate_to_body(agent.velocity - frame.ego.velocity, pose);
    const double h = heading_to_body(agent.heading, pose);
    const double quality = rng.uniform(0.2, 1.5);
    const Vec2 dp{rng.normal(0.0, config_.position_noise * quality), rng.normal(0.0, config_.position_noise * quality)};
    const Vec2 dv{rng.normal(0.0, config_.velocity_noise * quality), rng.normal(0.0, config_.velocity_noise * quality)};
    if (std::abs(p.x) >= 50.0 || std::abs(p.y) >= 50.0) continue;
    const BevPoint np = p + dp;
    const Vec2 nv = v + dv;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(kDetectionFeatures);
    f << np.x / 25.0, np.y / 25.0, nv.x / 10.0, nv.y / 10.0, std::cos(h), std::sin(h), agent.length / 5.0,
        agent.width / 2.0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0;
    f[8 + static_cast<int>(agent.category)] = 1.0;
    QueryToken q;
    q.embedding = detection_featurizer_ * f;
    q.reference_point = {np.x, np.y, 0.0};
    q.confidence = 1.0 / (1.0 + std::hypot(dp.x, dp.y) + std::hypot(dv.x, dv.y));
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QueryToken> QueryGenerator::map_queries(const Scene& scene, int t) const {
  if (t < 0 || t >= static_cast<int>(scene.frames.size())) throw RangeError("frame outside scene '" + scene.id + "'");
  const Frame& frame = scene.frames[t];
  const Pose pose = frame.ego.pose();
  std::vector<QueryToken> out;
  for (const auto& lane : frame.lanes) {
    std::array<BevPoint, 4> pts;
    bool inside = true;
    for (int k = 0; k < 4; ++k) {
      pts[k] = to_body_frame(lane.points[k], pose);
      inside = inside && std::abs(pts[k].x) < 50.0 && std::abs(pts[k].y) < 50.0;
    }
    if (!inside) continue;
    const Vec2 dir = pts[3] - pts[0];
    const double len = std::hypot(dir.x, dir.y);
    Eigen::VectorXd f(kMapFeatures);
    f << pts[0].x / 25.0, pts[0].y / 25.0, pts[1].x / 25.0, pts[1].y / 25.0, pts[2].x / 25.0, pts[2].y / 25.0,
        pts[3].x / 25.0, pts[3].y / 25.0, dir.x / len, dir.y / len;
    const BevPoint mid = (pts[1] + pts[2]) * 0.5;
    QueryToken q;
    q.embedding = map_featurizer_ * f;
    q.reference_point = {mid.x, mid.y, 0.0};
    out.push_back(std::move(q));
  }
  return out;
}

SlotQueries QueryGenerator::slot_queries(const Scene& scene, int t) const {
  MemoryQueue memory(config_.memory_depth, config_.top_k);
  const int first = std::max(0, t - static_cast<int>(config_.memory_depth));
  for (int past = first; past < t; ++past) memory.push(detection_queries(scene, past));
  const auto current = select_top_k(detection_queries(scene, t), config_.top_k);
  SlotQueries out;
  out.detection = memory.context(current);
  out.map = select_top_k(map_queries(scene, t), config_.top_k);
  return out;
}

}  // namespace atlasbench
