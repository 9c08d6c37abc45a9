#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "atlasbench/planner/config.hpp"
#include "atlasbench/planner/model.hpp"
#include "atlasbench/planner/vocab.hpp"

namespace atlasbench::planner {

struct Checkpoint {
  PlannerConfig model;
  TrainConfig train;  // train.seed is the training seed
  QueryGeneratorConfig queries;
  Vocab vocab;
  Params params;
  long step = 0;
};

/// JSON object with the configs, the vocabulary and every tensor as
/// {"name", "shape": [rows, cols], "data": base64 of little-endian float64, row-major}.
void write_checkpoint(const Checkpoint& ckpt, std::ostream& out);
/// Throws DataError on malformed content or tensors whose shapes do not match the config.
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const PlannerConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const QueryGeneratorConfig& c);

}  // namespace atlasbench::planner
