#pragma once

#include <functional>
#include <span>
#include <vector>

#include "atlasbench/planner/config.hpp"
#include "atlasbench/planner/model.hpp"
#include "atlasbench/planner/stream.hpp"

namespace atlasbench::planner {

/// Linear warm-up from 0 over the first ceil(warmup_fraction * total) steps, then cosine
/// decay to 0 at `total_steps`.
double learning_rate(long step, long total_steps, const TrainConfig& config);

/// Adam moments with decoupled weight decay on the tensors flagged `decay`.
class AdamW {
 public:
  AdamW(const PlannerConfig& model, int vocab_size, const TrainConfig& config);

  void step(Params& params, Params& grad, double lr);
  long steps() const { return t_; }

 private:
  TrainConfig config_;
  Params m_, v_;
  long t_ = 0;
};

/// Global L2 norm over every gradient tensor.
double grad_norm(Params& grad);

struct TrainStats {
  double initial_loss = 0.0;  // mean over the probe set before the first update
  double final_loss = 0.0;    // same probe set after the last update
  std::vector<double> epoch_loss;  // running mean of per-step losses
  long steps = 0;
};

/// Batch size 1, teacher forcing, shuffled each epoch from `config.seed`. Throws
/// NumericError with the step index on a non-finite loss, DomainError on an empty dataset.
/// `on_step(step, loss)` is called after every update.
TrainStats train(Model& model, std::span<const TokenStream> data, const TrainConfig& config,
                 const std::function<void(long, double)>& on_step = {});

/// Mean answer loss over up to `limit` streams, taken evenly across `data`.
double mean_loss(const Model& model, std::span<const TokenStream> data, std::size_t limit = 128);

}  // namespace atlasbench::planner
