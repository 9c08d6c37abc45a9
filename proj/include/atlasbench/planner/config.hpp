#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "atlasbench/metrics.hpp"
#include "atlasbench/qa_codec.hpp"
#include "atlasbench/query_generator.hpp"
#include "atlasbench/scene_sim.hpp"
#include "atlasbench/tokenizer_core.hpp"

namespace atlasbench::planner {

struct PlannerConfig {
  int d_q = 32;
  int d_llm = 64;
  int layers = 2;
  int heads = 4;
  int context = 512;
  int mlp_ratio = 4;
  ChainSpec chain;
  RefEmbedding rp_embedding = RefEmbedding::rp;
  /// False drops every `<query>` slot: the text-only ablation.
  bool inject_queries = true;
  /// Bin-token embeddings start on a parabola in their first two dimensions so the tied
  /// output head can express "near bin b" from the beginning. 0 disables.
  double bin_init_scale = 1.0;

  /// Throws ConfigError.
  void validate() const;
  friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

struct TrainConfig {
  double lr = 2e-5;
  /// Multiplier on `lr`: a from-scratch toy model needs far larger steps than fine-tuning.
  double lr_scale = 100.0;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double warmup_fraction = 0.03;
  double grad_clip = 1.0;  // global L2 norm; 0 disables
  int epochs = 2;
  std::uint64_t seed = 0;

  double peak_lr() const { return lr * lr_scale; }
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Everything a pipeline run reads from its config file.
struct RunConfig {
  SceneConfig scene;
  QueryGeneratorConfig queries;
  PlannerConfig model;
  TrainConfig train;
  EgoFootprint footprint;
  L2Convention l2 = L2Convention::stp3;

  void validate() const;
};

/// INI sections [scene], [queries], [model], [train], [eval]. Missing keys keep their
/// defaults; unknown sections or keys throw ConfigError.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace atlasbench::planner
