#include "atlasbench/planner/generate.hpp"

#include <cmath>

#include "atlasbench/errors.hpp"
#include "atlasbench/random.hpp"

namespace atlasbench::planner {

namespace {

int pick(const Eigen::VectorXd& logits, const DecodeOptions& o, Rng& rng) {
  Eigen::Index best = 0;
  logits.maxCoeff(&best);  // first maximum
  if (o.mode == DecodeOptions::Mode::greedy) return static_cast<int>(best);
  const Eigen::VectorXd p = ((logits.array() - logits[best]) / o.temperature).exp().matrix();
  double u = rng.uniform() * p.sum();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    u -= p[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(best);
}

}  // namespace

Generation generate(const Model& model, const Vocab& vocab, const TokenStream& prompt, const DecodeOptions& o) {
  if (o.mode == DecodeOptions::Mode::sample && !(o.temperature > 0.0)) {
    throw DomainError("sampling temperature must be positive");
  }
  if (o.max_tokens < 1) throw DomainError("max_tokens must be positive");
  TokenStream question = prompt;
  if (question.answer_begin == 0 || question.answer_begin > question.size()) {
    throw DomainError("prompt has no answer marker");
  }
  question.ids.resize(question.answer_begin);

  InferenceSession session(model);
  Eigen::VectorXd logits = session.prefill(question);
  Rng rng(o.seed);
  Generation g;
  g.truncated = true;
  const auto context = static_cast<std::size_t>(model.config().context);
  for (int n = 0; n < o.max_tokens; ++n) {
    const int id = pick(logits, o, rng);
    if (id == Vocab::kEos) {
      g.truncated = false;
      break;
    }
    g.ids.push_back(id);
    if (session.length() >= context) break;
    logits = session.push(id);
  }
  g.text = vocab.decode_answer(g.ids);
  return g;
}

}  // namespace atlasbench::planner
