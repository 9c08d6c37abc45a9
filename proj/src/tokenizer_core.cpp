#include "atlasbench/tokenizer_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "atlasbench/errors.hpp"

namespace atlasbench {

Eigen::MatrixXd stack_embeddings(std::span<const QueryToken> queries, int expected_dim) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(queries.size()), expected_dim);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (queries[i].embedding.size() != expected_dim) {
      throw ShapeError("query " + std::to_string(i) + " has dimension " + std::to_string(queries[i].embedding.size()) +
                       ", expected " + std::to_string(expected_dim));
    }
    out.row(static_cast<Eigen::Index>(i)) = queries[i].embedding.transpose();
  }
  return out;
}

Eigen::MatrixXd embed_tokens(std::span<const QueryToken> queries, const RefPointProjector& rp) {
  if (rp.weight.rows() != rp.bias.size() || rp.weight.cols() != 3) {
    throw ShapeError("reference point projector must be [d_q x 3] with a [d_q] bias");
  }
  Eigen::MatrixXd out = stack_embeddings(queries, rp.dim());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& r = queries[i].reference_point;
    const Eigen::Vector3d ref(r[0], r[1], r[2]);
    out.row(static_cast<Eigen::Index>(i)) += (rp.weight * ref + rp.bias).transpose();
  }
  return out;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& tokens, const Projector& p) {
  if (tokens.cols() != p.in_dim() || p.bias.size() != p.out_dim()) {
    throw ShapeError("projector expects " + std::to_string(p.in_dim()) + " input columns, got " +
                     std::to_string(tokens.cols()));
  }
  Eigen::MatrixXd out = tokens * p.weight.transpose();
  out.rowwise() += p.bias.transpose();
  return out;
}

std::string_view to_string(RefEmbedding e) {
  switch (e) {
    case RefEmbedding::none: return "none";
    case RefEmbedding::sincos: return "sincos";
    case RefEmbedding::learned: return "learned";
    case RefEmbedding::rp: return "rp";
  }
  return "none";
}

std::optional<RefEmbedding> parse_ref_embedding(std::string_view name) {
  for (auto e : {RefEmbedding::none, RefEmbedding::sincos, RefEmbedding::learned, RefEmbedding::rp}) {
    if (to_string(e) == name) return e;
  }
  if (name == "sin-cos") return RefEmbedding::sincos;
  return std::nullopt;
}

Eigen::VectorXd sincos_code(const std::array<double, 3>& point, int dim) {
  Eigen::VectorXd code(dim);
  for (int i = 0; i < dim; ++i) {
    const int axis = i % 3;
    const int band = i / 3;
    // Wavelengths from 100 m down by factors of two, alternating sin and cos.
    const double freq = 2.0 * M_PI / 100.0 * std::pow(2.0, band / 2);
    const double arg = freq * point[axis];
    code[i] = band % 2 == 0 ? std::sin(arg) : std::cos(arg);
  }
  return code;
}

std::vector<QueryToken> select_top_k(std::span<const QueryToken> frame, std::size_t k) {
  std::vector<std::size_t> order(frame.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return frame[a].confidence.value_or(0.0) > frame[b].confidence.value_or(0.0);
  });
  order.resize(std::min(k, order.size()));
  std::vector<QueryToken> out;
  out.reserve(order.size());
  for (auto i : order) out.push_back(frame[i]);
  return out;
}

void MemoryQueue::push(std::span<const QueryToken> frame) {
  if (depth_ == 0) return;
  slots_.push_back(select_top_k(frame, k_));
  while (slots_.size() > depth_) slots_.pop_front();
}

std::vector<QueryToken> MemoryQueue::context(std::span<const QueryToken> current) const {
  std::vector<QueryToken> out;
  for (const auto& s : slots_) out.insert(out.end(), s.begin(), s.end());
  out.insert(out.end(), current.begin(), current.end());
  return out;
}

}  // namespace atlasbench
