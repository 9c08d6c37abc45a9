#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "atlasbench/scene.hpp"
#include "atlasbench/tokenizer_core.hpp"

namespace atlasbench {

/// Stand-in for trained 3D tokenizers: ground-truth agents and lanes, perturbed by Gaussian
/// noise, mapped to query embeddings through fixed random featurizers.
struct QueryGeneratorConfig {
  int dim = 32;
  double position_noise = 0.3;  // meters, scaled per query
  double velocity_noise = 0.3;  // m/s, scaled per query
  std::uint64_t featurizer_seed = 0x3d70c;
  std::size_t memory_depth = 3;
  std::size_t top_k = 256;
};

/// Per-slot query lists for one sample: detection (memory + current) then map.
struct SlotQueries {
  std::vector<QueryToken> detection;
  std::vector<QueryToken> map;
};

class QueryGenerator {
 public:
  explicit QueryGenerator(QueryGeneratorConfig config = {});

  const QueryGeneratorConfig& config() const { return config_; }

  /// Detection queries of frame `t`, in that frame's ego coordinates. Noise is seeded by
  /// (scene id, t) so repeated calls agree.
  std::vector<QueryToken> detection_queries(const Scene& scene, int t) const;
  /// One map query per lane centerline in range; map queries carry no confidence.
  std::vector<QueryToken> map_queries(const Scene& scene, int t) const;

  /// Runs the memory queue over the `memory_depth` frames before `t` and returns both slots.
  SlotQueries slot_queries(const Scene& scene, int t) const;

  static constexpr int kDetectionFeatures = 18;
  static constexpr int kMapFeatures = 10;

 private:
  QueryGeneratorConfig config_;
  Eigen::MatrixXd detection_featurizer_;  // [dim x kDetectionFeatures]
  Eigen::MatrixXd map_featurizer_;        // [dim x kMapFeatures]
};

}  // namespace atlasbench
