#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "atlasbench/dataset.hpp"
#include "atlasbench/planner/vocab.hpp"
#include "atlasbench/query_generator.hpp"
#include "atlasbench/tokenizer_core.hpp"

namespace atlasbench::planner {

/// Marks a position holding a continuous 3D-token row instead of a vocabulary id.
inline constexpr int kInjected = -1;

/// Mixed discrete/continuous model input. Injected rows stay in query space; the model
/// applies the reference-point embedding and the projector itself so both can be trained.
struct TokenStream {
  std::vector<int> ids;                               // kInjected at spliced rows
  Eigen::MatrixXd injected;                           // [n_injected x d_q], order of appearance
  std::vector<std::array<double, 3>> reference_points;  // one per injected row
  std::vector<int> slot_index;                        // index of the row within its slot
  std::size_t answer_begin = 0;                       // first answer position; ids.size() if none

  std::size_t size() const { return ids.size(); }
  std::size_t answer_length() const { return ids.size() - answer_begin; }
};

/// BOS, question pieces with each `<query>` replaced by the rows of the matching slot, ANS,
/// then the answer ids and EOS when `answer` is non-empty. Throws ShapeError when the slot
/// count differs from `slots.size()` or row widths disagree.
TokenStream assemble_stream(const Vocab& vocab, std::string_view question, std::span<const std::vector<QueryToken>> slots,
                            std::string_view answer = {});

/// Same, with plain matrices (reference points at the origin).
TokenStream assemble_stream(const Vocab& vocab, std::string_view question, std::span<const Eigen::MatrixXd> slots,
                            std::string_view answer = {});

/// Slot contents for a question about `frame` of `scene`. Planning questions get detection
/// queries (with memory) then map queries. Perception questions get the queries of their
/// task, split by bearing into six camera sectors when there are six slots. Empty lists when
/// `inject` is false.
std::vector<std::vector<QueryToken>> slot_contents(const QueryGenerator& generator, const Scene& scene, int frame,
                                                   Task task, int slot_count, bool inject);

/// Streams for a dataset, looking scenes up by id. Throws DataError for unknown scene ids.
std::vector<TokenStream> build_streams(const Vocab& vocab, std::span<const QaPair> pairs,
                                       std::span<const Scene> scenes, const QueryGenerator& generator, bool inject,
                                       bool with_answers = true);

}  // namespace atlasbench::planner
