#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace atlasbench {

/// DETR-style query: a content embedding plus a 3D reference point.
struct QueryToken {
  Eigen::VectorXd embedding;
  std::array<double, 3> reference_point{0.0, 0.0, 0.0};
  std::optional<double> confidence;  // detection queries only
};

/// Linear map from a reference point into query space. Starts at exactly zero, so at
/// construction it leaves query embeddings untouched.
struct RefPointProjector {
  Eigen::MatrixXd weight;  // [d_q x 3]
  Eigen::VectorXd bias;    // [d_q]

  explicit RefPointProjector(int d_q = 32) : weight(Eigen::MatrixXd::Zero(d_q, 3)), bias(Eigen::VectorXd::Zero(d_q)) {}
  int dim() const { return static_cast<int>(bias.size()); }
};

/// Single affine layer from query space into the planner's embedding space.
struct Projector {
  Eigen::MatrixXd weight;  // [d_llm x d_q]
  Eigen::VectorXd bias;    // [d_llm]

  Projector(int d_llm = 64, int d_q = 32)
      : weight(Eigen::MatrixXd::Zero(d_llm, d_q)), bias(Eigen::VectorXd::Zero(d_llm)) {}
  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

/// Row i = embedding_i + weight * reference_point_i + bias. Throws ShapeError on mismatch.
Eigen::MatrixXd embed_tokens(std::span<const QueryToken> queries, const RefPointProjector& rp);

/// Row-wise affine map [N x d_q] -> [N x d_llm]. Throws ShapeError on mismatch.
Eigen::MatrixXd project(const Eigen::MatrixXd& tokens, const Projector& p);

/// Stacked embeddings without any positional term, [N x d]. Throws ShapeError on mixed sizes.
Eigen::MatrixXd stack_embeddings(std::span<const QueryToken> queries, int expected_dim);

/// How reference points enter the token: not at all, a fixed sinusoidal code, a learned
/// per-slot-index table, or the zero-initialized linear projector.
enum class RefEmbedding { none, sincos, learned, rp };

std::string_view to_string(RefEmbedding e);
std::optional<RefEmbedding> parse_ref_embedding(std::string_view name);

/// Fixed sinusoidal code of a reference point (meters), length `dim`.
Eigen::VectorXd sincos_code(const std::array<double, 3>& point, int dim);

/// Stable top-k by confidence: descending confidence, ties keep their original order.
/// Tokens without confidence rank as 0.
std::vector<QueryToken> select_top_k(std::span<const QueryToken> frame, std::size_t k);

/// FIFO of the top-k queries from the most recent `depth` frames.
class MemoryQueue {
 public:
  explicit MemoryQueue(std::size_t depth = 3, std::size_t k = 256) : depth_(depth), k_(k) {}

  /// Keeps the frame's k most confident tokens and evicts the oldest frame beyond `depth`.
  /// Empty frames occupy a slot like any other.
  void push(std::span<const QueryToken> frame);

  /// Stored frames oldest to newest, then `current`, flattened.
  std::vector<QueryToken> context(std::span<const QueryToken> current) const;

  std::size_t depth() const { return depth_; }
  std::size_t k() const { return k_; }
  const std::deque<std::vector<QueryToken>>& slots() const { return slots_; }

 private:
  std::size_t depth_;
  std::size_t k_;
  std::deque<std::vector<QueryToken>> slots_;
};

/// Upper bound on injected 3D tokens: tokenizers * (depth + 1) * k.
constexpr std::size_t injected_token_budget(std::size_t depth, std::size_t k, std::size_t tokenizers) {
  return tokenizers * (depth + 1) * k;
}

}  // namespace atlasbench
