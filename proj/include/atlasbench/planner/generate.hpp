#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "atlasbench/planner/model.hpp"
#include "atlasbench/planner/stream.hpp"
#include "atlasbench/planner/vocab.hpp"

namespace atlasbench::planner {

struct DecodeOptions {
  enum class Mode { greedy, sample };
  Mode mode = Mode::greedy;
  double temperature = 1.0;  // sample mode only
  std::uint64_t seed = 0;    // sample mode only
  int max_tokens = 128;      // cap on generated tokens, EOS included
};

struct Generation {
  std::vector<int> ids;  // generated ids without the final EOS
  std::string text;
  bool truncated = false;  // no EOS within the cap or the context
};

/// Decodes an answer for the question part of `prompt` (positions before answer_begin).
/// Greedy picks the lowest id among maximal logits.
Generation generate(const Model& model, const Vocab& vocab, const TokenStream& prompt, const DecodeOptions& options = {});

}  // namespace atlasbench::planner
