#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atlasbench/planner/config.hpp"
#include "atlasbench/planner/stream.hpp"
#include "atlasbench/tokenizer_core.hpp"

namespace atlasbench::planner {

using RowVec = Eigen::RowVectorXd;

struct LayerParams {
  RowVec ln1_g, ln1_b;
  Eigen::MatrixXd w_qkv;  // [d x 3d]
  RowVec b_qkv;
  Eigen::MatrixXd w_o;    // [d x d]
  RowVec b_o;
  RowVec ln2_g, ln2_b;
  Eigen::MatrixXd w_fc;   // [d x r*d]
  RowVec b_fc;
  Eigen::MatrixXd w_out;  // [r*d x d]
  RowVec b_out;
};

/// Flat view of one tensor for optimizers, serialization and gradient checks.
struct TensorView {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  bool decay;  // weight matrices decay, biases and norm parameters do not

  Eigen::Index size() const { return rows * cols; }
  Eigen::Map<Eigen::VectorXd> flat() const { return {data, size()}; }
};

struct Params {
  Eigen::MatrixXd tok_emb;    // [vocab x d], also the output head
  Eigen::MatrixXd pos_emb;    // [context x d]
  Eigen::MatrixXd ref_table;  // [context x d_q], used by RefEmbedding::learned
  RefPointProjector rp;
  Projector projector;
  std::vector<LayerParams> layers;
  RowVec lnf_g, lnf_b;

  /// All tensors zero, shaped for `config` and `vocab_size`.
  static Params zeros(const PlannerConfig& config, int vocab_size);
  /// Fixed, documented order; names are unique.
  std::vector<TensorView> tensors();
  void set_zero();
};

/// Random initialization. The reference-point projector stays exactly zero and consumes no
/// random numbers, so `rp` and `none` models start bit-identical.
Params init_params(const PlannerConfig& config, int vocab_size, std::uint64_t seed);

/// Mean negative log-likelihood of `targets` under row-wise softmax of `logits`.
/// Throws DomainError when `targets` is empty, ShapeError on a row count mismatch.
double cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> targets);

class Model {
 public:
  Model(PlannerConfig config, Params params, int vocab_size);
  Model(PlannerConfig config, int vocab_size, std::uint64_t seed)
      : Model(config, init_params(config, vocab_size, seed), vocab_size) {}

  const PlannerConfig& config() const { return config_; }
  int vocab_size() const { return vocab_size_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }

  /// [stream length x vocab] logits. Throws RangeError past the context length.
  Eigen::MatrixXd logits(const TokenStream& stream) const;
  /// Mean cross-entropy over the answer tokens (EOS included). Throws DomainError without answer.
  double loss(const TokenStream& stream) const;
  /// Loss, with gradients accumulated into `grad` (shaped like params()).
  double loss_and_grad(const TokenStream& stream, Params& grad) const;

  /// Input row of one position: table lookup for ids, projected 3D token otherwise.
  Eigen::RowVectorXd embed_position(int id, const Eigen::RowVectorXd& query, const std::array<double, 3>& ref,
                                    int slot_index, int position) const;

 private:
  struct Cache;
  Eigen::MatrixXd forward(const TokenStream& stream, Cache* cache) const;
  void check_stream(const TokenStream& stream) const;

  friend class InferenceSession;

  PlannerConfig config_;
  Params params_;
  int vocab_size_;
};

/// Incremental decoding with per-layer key/value caches. Feeding a stream position by
/// position reproduces Model::logits row by row.
class InferenceSession {
 public:
  explicit InferenceSession(const Model& model);

  /// Feeds every position of `stream`; returns the logits after the last one.
  Eigen::VectorXd prefill(const TokenStream& stream);
  /// Feeds one vocabulary token; returns the next-token logits.
  Eigen::VectorXd push(int id);
  std::size_t length() const { return length_; }

 private:
  Eigen::VectorXd step(const Eigen::RowVectorXd& x);

  const Model& model_;
  std::vector<Eigen::MatrixXd> keys_, values_;  // per layer, [context x d]
  std::size_t length_ = 0;
};

}  // namespace atlasbench::planner
