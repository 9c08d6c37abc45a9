#include "atlasbench/planner/pipeline.hpp"

#include "atlasbench/random.hpp"

namespace atlasbench::planner {

FitResult fit_planner(std::span<const QaPair> pairs, std::span<const Scene> scenes, const RunConfig& config,
                      std::uint64_t seed, const std::function<void(long, double)>& on_step) {
  config.validate();
  std::vector<std::string> questions;
  questions.reserve(pairs.size());
  for (const auto& p : pairs) questions.push_back(p.question);
  Vocab vocab = Vocab::build(questions);

  const QueryGenerator generator(config.queries);
  const auto streams = build_streams(vocab, pairs, scenes, generator, config.model.inject_queries, true);

  TrainConfig tc = config.train;
  tc.seed = seed;
  Model model(config.model, vocab.size(), mix64(seed, 0x1a17));
  const TrainStats stats = train(model, streams, tc, on_step);
  return {Checkpoint{config.model, tc, config.queries, std::move(vocab), model.params(), stats.steps}, stats};
}

std::vector<Prediction> predict(const Checkpoint& checkpoint, std::span<const QaPair> pairs,
                                std::span<const Scene> scenes, const DecodeOptions& options) {
  const Model model(checkpoint.model, checkpoint.params, checkpoint.vocab.size());
  const QueryGenerator generator(checkpoint.queries);
  const auto prompts = build_streams(checkpoint.vocab, pairs, scenes, generator, checkpoint.model.inject_queries, false);
  std::vector<Prediction> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    DecodeOptions o = options;
    o.seed = mix64(options.seed, i);
    const auto g = generate(model, checkpoint.vocab, prompts[i], o);
    Prediction p;
    p.scene_id = pairs[i].scene_id;
    p.frame = pairs[i].frame;
    p.task = pairs[i].task;
    p.answer_text = g.text;
    if (pairs[i].task == Task::planning) p.chain = checkpoint.model.chain;
    p.truncated = g.truncated;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> stationary_predictions(std::span<const QaPair> pairs) {
  std::vector<Prediction> out;
  for (const auto& pair : pairs) {
    if (pair.task != Task::planning) continue;
    Prediction p;
    p.scene_id = pair.scene_id;
    p.frame = pair.frame;
    p.waypoints = Trajectory{};
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace atlasbench::planner
