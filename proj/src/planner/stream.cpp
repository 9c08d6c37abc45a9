#include "atlasbench/planner/stream.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "atlasbench/errors.hpp"
#include "atlasbench/question_pool.hpp"

namespace atlasbench::planner {

namespace {

struct SlotRows {
  const Eigen::MatrixXd* rows;
  const std::vector<std::array<double, 3>>* refs;  // may be null
};

TokenStream assemble(const Vocab& vocab, std::string_view question, std::span<const SlotRows> slots,
                     std::string_view answer) {
  const auto pieces = lex_question(question);
  int slot_count = 0;
  for (const auto& p : pieces) slot_count += p == kQuerySlot;
  if (slot_count != static_cast<int>(slots.size())) {
    throw ShapeError("question has " + std::to_string(slot_count) + " <query> slots, got " +
                     std::to_string(slots.size()) + " token sets");
  }
  Eigen::Index total = 0, width = -1;
  for (const auto& s : slots) {
    if (s.rows->rows() == 0) continue;
    if (width >= 0 && s.rows->cols() != width) throw ShapeError("3D token slots have different widths");
    width = s.rows->cols();
    total += s.rows->rows();
  }

  TokenStream out;
  out.injected.resize(total, std::max<Eigen::Index>(width, 0));
  out.ids.push_back(Vocab::kBos);
  std::size_t next_slot = 0;
  Eigen::Index row = 0;
  for (const auto& p : pieces) {
    if (p != kQuerySlot) {
      out.ids.push_back(vocab.id(p));
      continue;
    }
    const SlotRows& s = slots[next_slot++];
    for (Eigen::Index i = 0; i < s.rows->rows(); ++i) {
      out.ids.push_back(kInjected);
      out.injected.row(row++) = s.rows->row(i);
      out.reference_points.push_back(s.refs ? (*s.refs)[i] : std::array<double, 3>{0.0, 0.0, 0.0});
      out.slot_index.push_back(static_cast<int>(i));
    }
  }
  out.ids.push_back(Vocab::kAns);
  out.answer_begin = out.ids.size();
  if (!answer.empty()) {
    for (int id : vocab.encode_answer(answer)) out.ids.push_back(id);
    out.ids.push_back(Vocab::kEos);
  }
  return out;
}

}  // namespace

TokenStream assemble_stream(const Vocab& vocab, std::string_view question, std::span<const std::vector<QueryToken>> slots,
                            std::string_view answer) {
  std::vector<Eigen::MatrixXd> rows;
  std::vector<std::vector<std::array<double, 3>>> refs;
  rows.reserve(slots.size());
  refs.reserve(slots.size());
  for (const auto& s : slots) {
    const int dim = s.empty() ? 0 : static_cast<int>(s.front().embedding.size());
    rows.push_back(stack_embeddings(s, dim));
    auto& r = refs.emplace_back();
    for (const auto& q : s) r.push_back(q.reference_point);
  }
  std::vector<SlotRows> view;
  for (std::size_t i = 0; i < slots.size(); ++i) view.push_back({&rows[i], &refs[i]});
  return assemble(vocab, question, view, answer);
}

TokenStream assemble_stream(const Vocab& vocab, std::string_view question, std::span<const Eigen::MatrixXd> slots,
                            std::string_view answer) {
  std::vector<SlotRows> view;
  for (const auto& m : slots) view.push_back({&m, nullptr});
  return assemble(vocab, question, view, answer);
}

std::vector<std::vector<QueryToken>> slot_contents(const QueryGenerator& generator, const Scene& scene, int frame,
                                                   Task task, int slot_count, bool inject) {
  std::vector<std::vector<QueryToken>> out(slot_count);
  if (!inject || slot_count == 0) return out;
  if (task == Task::planning) {
    auto q = generator.slot_queries(scene, frame);
    out[0] = std::move(q.detection);
    if (slot_count > 1) out[1] = std::move(q.map);
    return out;
  }
  std::vector<QueryToken> all;
  if (task == Task::lane) all = generator.map_queries(scene, frame);
  else all = generator.slot_queries(scene, frame).detection;
  if (slot_count == 1) {
    out[0] = std::move(all);
    return out;
  }
  // Sectors of equal angle, the first centered straight ahead, counted clockwise.
  const double sector = 2.0 * M_PI / slot_count;
  for (auto& q : all) {
    const double bearing = std::atan2(q.reference_point[0], q.reference_point[1]);
    double a = std::fmod(bearing + sector / 2.0 + 2.0 * M_PI, 2.0 * M_PI);
    const int view = std::min(slot_count - 1, static_cast<int>(a / sector));
    out[view].push_back(std::move(q));
  }
  return out;
}

std::vector<TokenStream> build_streams(const Vocab& vocab, std::span<const QaPair> pairs,
                                       std::span<const Scene> scenes, const QueryGenerator& generator, bool inject,
                                       bool with_answers) {
  std::unordered_map<std::string, const Scene*> by_id;
  for (const auto& s : scenes) by_id.emplace(s.id, &s);
  std::vector<TokenStream> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto it = by_id.find(p.scene_id);
    if (it == by_id.end()) throw DataError("no scene with id '" + p.scene_id + "'");
    const auto slots = slot_contents(generator, *it->second, p.frame, p.task, count_slots(p.question), inject);
    out.push_back(assemble_stream(vocab, p.question, std::span<const std::vector<QueryToken>>(slots),
                                  with_answers ? std::string_view(p.answer) : std::string_view()));
  }
  return out;
}

}  // namespace atlasbench::planner
