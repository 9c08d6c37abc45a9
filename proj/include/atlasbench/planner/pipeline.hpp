#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "atlasbench/dataset.hpp"
#include "atlasbench/planner/checkpoint.hpp"
#include "atlasbench/planner/generate.hpp"
#include "atlasbench/planner/train.hpp"
#include "atlasbench/report.hpp"

namespace atlasbench::planner {

struct FitResult {
  Checkpoint checkpoint;
  TrainStats stats;
};

/// Builds the vocabulary from the pairs' questions, initializes a model from `seed` and trains
/// it on every pair. `config.train.seed` is replaced by `seed`.
FitResult fit_planner(std::span<const QaPair> pairs, std::span<const Scene> scenes, const RunConfig& config,
                      std::uint64_t seed, const std::function<void(long, double)>& on_step = {});

/// Decodes an answer for every pair; the pairs' answers are ignored.
std::vector<Prediction> predict(const Checkpoint& checkpoint, std::span<const QaPair> pairs,
                                std::span<const Scene> scenes, const DecodeOptions& options = {});

/// Stationary-plan predictions for the planning pairs: the zero-motion baseline.
std::vector<Prediction> stationary_predictions(std::span<const QaPair> pairs);

}  // namespace atlasbench::planner
