#include "atlasbench/planner/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "atlasbench/errors.hpp"
#include "atlasbench/random.hpp"

namespace atlasbench::planner {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kLnEps = 1e-5;
const double kGeluC = std::sqrt(2.0 / M_PI);

void layer_norm(const MatrixXd& x, const RowVec& g, const RowVec& b, MatrixXd& y, MatrixXd& xhat, VectorXd& rstd) {
  const VectorXd mean = x.rowwise().mean();
  xhat = x.colwise() - mean;
  rstd = (xhat.array().square().rowwise().mean() + kLnEps).rsqrt().matrix();
  xhat = xhat.array().colwise() * rstd.array();
  y = (xhat.array().rowwise() * g.array()).rowwise() + b.array();
}

MatrixXd layer_norm_backward(const MatrixXd& dy, const MatrixXd& xhat, const VectorXd& rstd, const RowVec& g,
                             RowVec& dg, RowVec& db) {
  dg += (dy.array() * xhat.array()).colwise().sum().matrix();
  db += dy.colwise().sum();
  const MatrixXd dxhat = dy.array().rowwise() * g.array();
  const VectorXd m1 = dxhat.rowwise().mean();
  const VectorXd m2 = (dxhat.array() * xhat.array()).rowwise().mean();
  MatrixXd dx = (dxhat.colwise() - m1).array() - xhat.array().colwise() * m2.array();
  return dx.array().colwise() * rstd.array();
}

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x))); }

double gelu_grad(double x) {
  const double t = std::tanh(kGeluC * (x + 0.044715 * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
}

void fill_normal(Rng& rng, double* data, Eigen::Index n, double std) {
  for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.normal(0.0, std);
}

template <class M>
void fill_normal(Rng& rng, M& m, double std) {
  fill_normal(rng, m.data(), m.size(), std);
}

}  // namespace

// ----- parameters -------------------------------------------------------------

Params Params::zeros(const PlannerConfig& c, int vocab_size) {
  const int d = c.d_llm, h = c.mlp_ratio * c.d_llm;
  Params p;
  p.tok_emb = MatrixXd::Zero(vocab_size, d);
  p.pos_emb = MatrixXd::Zero(c.context, d);
  p.ref_table = MatrixXd::Zero(c.context, c.d_q);
  p.rp = RefPointProjector(c.d_q);
  p.projector = Projector(d, c.d_q);
  for (int l = 0; l < c.layers; ++l) {
    LayerParams L;
    L.ln1_g = RowVec::Zero(d);
    L.ln1_b = RowVec::Zero(d);
    L.w_qkv = MatrixXd::Zero(d, 3 * d);
    L.b_qkv = RowVec::Zero(3 * d);
    L.w_o = MatrixXd::Zero(d, d);
    L.b_o = RowVec::Zero(d);
    L.ln2_g = RowVec::Zero(d);
    L.ln2_b = RowVec::Zero(d);
    L.w_fc = MatrixXd::Zero(d, h);
    L.b_fc = RowVec::Zero(h);
    L.w_out = MatrixXd::Zero(h, d);
    L.b_out = RowVec::Zero(d);
    p.layers.push_back(std::move(L));
  }
  p.lnf_g = RowVec::Zero(d);
  p.lnf_b = RowVec::Zero(d);
  return p;
}

std::vector<TensorView> Params::tensors() {
  std::vector<TensorView> t;
  auto add = [&t](std::string name, auto& m, bool decay) {
    t.push_back({std::move(name), m.data(), m.rows(), m.cols(), decay});
  };
  add("tok_emb", tok_emb, true);
  add("pos_emb", pos_emb, true);
  add("ref_table", ref_table, true);
  add("rp.weight", rp.weight, true);
  add("rp.bias", rp.bias, false);
  add("projector.weight", projector.weight, true);
  add("projector.bias", projector.bias, false);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& L = layers[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    add(p + "ln1.g", L.ln1_g, false);
    add(p + "ln1.b", L.ln1_b, false);
    add(p + "attn.w_qkv", L.w_qkv, true);
    add(p + "attn.b_qkv", L.b_qkv, false);
    add(p + "attn.w_o", L.w_o, true);
    add(p + "attn.b_o", L.b_o, false);
    add(p + "ln2.g", L.ln2_g, false);
    add(p + "ln2.b", L.ln2_b, false);
    add(p + "mlp.w_fc", L.w_fc, true);
    add(p + "mlp.b_fc", L.b_fc, false);
    add(p + "mlp.w_out", L.w_out, true);
    add(p + "mlp.b_out", L.b_out, false);
  }
  add("lnf.g", lnf_g, false);
  add("lnf.b", lnf_b, false);
  return t;
}

void Params::set_zero() {
  for (auto& t : tensors()) t.flat().setZero();
}

Params init_params(const PlannerConfig& c, int vocab_size, std::uint64_t seed) {
  c.validate();
  Params p = Params::zeros(c, vocab_size);
  Rng rng(seed);
  const double std = 0.02;
  const double resid_std = std / std::sqrt(2.0 * c.layers);
  fill_normal(rng, p.tok_emb, std);
  if (c.bin_init_scale > 0.0 && c.d_llm >= 2) {
    for (int b = 0; b < Vocab::kBinCount && Vocab::kBinBase + b < vocab_size; ++b) {
      const double u = (b - Vocab::kBinCount / 2) / (Vocab::kBinCount / 2.0);
      p.tok_emb(Vocab::kBinBase + b, 0) = c.bin_init_scale * u;
      p.tok_emb(Vocab::kBinBase + b, 1) = -c.bin_init_scale * u * u;
    }
  }
  fill_normal(rng, p.pos_emb, std);
  fill_normal(rng, p.projector.weight, 1.0 / std::sqrt(static_cast<double>(c.d_q)));
  for (auto& L : p.layers) {
    L.ln1_g.setOnes();
    L.ln2_g.setOnes();
    fill_normal(rng, L.w_qkv, std);
    fill_normal(rng, L.w_o, resid_std);
    fill_normal(rng, L.w_fc, std);
    fill_normal(rng, L.w_out, resid_std);
  }
  p.lnf_g.setOnes();
  // Own stream: the learned table must not shift the draws of the shared weights.
  Rng table_rng(mix64(seed, 0x7ab1e));
  fill_normal(table_rng, p.ref_table, std);
  return p;
}

double cross_entropy(const MatrixXd& logits, std::span<const int> targets) {
  if (targets.empty()) throw DomainError("cross-entropy over an empty target set");
  if (logits.rows() != static_cast<Eigen::Index>(targets.size())) {
    throw ShapeError("logit rows and targets differ in length");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, targets[i]);
  }
  return total / static_cast<double>(targets.size());
}

// ----- model --------------------------------------------------------------------

struct Model::Cache {
  struct Layer {
    MatrixXd x_in, xhat1, a1, qkv, attn, x_mid, xhat2, a2, h_pre, h_act;
    VectorXd rstd1, rstd2;
    std::vector<MatrixXd> probs;  // per head, [T x T] lower triangular
  };
  MatrixXd u;  // injected rows after the reference-point term, [n x d_q]
  std::vector<Layer> layers;
  MatrixXd x_last, xhatf, hf;
  VectorXd rstdf;
};

Model::Model(PlannerConfig config, Params params, int vocab_size)
    : config_(std::move(config)), params_(std::move(params)), vocab_size_(vocab_size) {
  config_.validate();
  if (params_.tok_emb.rows() != vocab_size_ || params_.tok_emb.cols() != config_.d_llm ||
      static_cast<int>(params_.layers.size()) != config_.layers || params_.pos_emb.rows() != config_.context ||
      params_.projector.in_dim() != config_.d_q) {
    throw ShapeError("parameters do not match the planner configuration");
  }
}

void Model::check_stream(const TokenStream& s) const {
  if (s.size() == 0) throw DomainError("empty token stream");
  if (static_cast<int>(s.size()) > config_.context) {
    throw RangeError("stream of " + std::to_string(s.size()) + " tokens exceeds context " +
                     std::to_string(config_.context));
  }
  const Eigen::Index n = s.injected.rows();
  if (n > 0 && s.injected.cols() != config_.d_q) {
    throw ShapeError("3D tokens have width " + std::to_string(s.injected.cols()) + ", expected " +
                     std::to_string(config_.d_q));
  }
  if (static_cast<Eigen::Index>(s.reference_points.size()) != n || static_cast<Eigen::Index>(s.slot_index.size()) != n) {
    throw ShapeError("3D token rows, reference points and slot indices differ in count");
  }
  Eigen::Index seen = 0;
  for (int id : s.ids) {
    if (id == kInjected) ++seen;
    else if (id < 0 || id >= vocab_size_) throw RangeError("token id " + std::to_string(id) + " outside vocabulary");
  }
  if (seen != n) throw ShapeError("stream has " + std::to_string(seen) + " injected positions but " +
                                  std::to_string(n) + " 3D token rows");
}

Eigen::RowVectorXd Model::embed_position(int id, const Eigen::RowVectorXd& query, const std::array<double, 3>& ref,
                                         int slot_index, int position) const {
  Eigen::RowVectorXd x;
  if (id != kInjected) {
    x = params_.tok_emb.row(id);
  } else {
    Eigen::RowVectorXd u = query;
    switch (config_.rp_embedding) {
      case RefEmbedding::none: break;
      case RefEmbedding::sincos: u += sincos_code(ref, config_.d_q).transpose(); break;
      case RefEmbedding::learned: u += params_.ref_table.row(slot_index); break;
      case RefEmbedding::rp:
        u += (params_.rp.weight * Eigen::Vector3d(ref[0], ref[1], ref[2]) + params_.rp.bias).transpose();
        break;
    }
    x = (params_.projector.weight * u.transpose() + params_.projector.bias).transpose();
  }
  return x + params_.pos_emb.row(position);
}

MatrixXd Model::forward(const TokenStream& s, Cache* cache) const {
  check_stream(s);
  const int T = static_cast<int>(s.size());
  const int d = config_.d_llm, H = config_.heads, dh = d / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Injected rows: query + reference-point term, then the projector.
  MatrixXd u = s.injected;
  const Eigen::Index n = u.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = s.reference_points[i];
    switch (config_.rp_embedding) {
      case RefEmbedding::none: break;
      case RefEmbedding::sincos: u.row(i) += sincos_code(r, config_.d_q).transpose(); break;
      case RefEmbedding::learned:
        if (s.slot_index[i] < 0 || s.slot_index[i] >= config_.context) throw RangeError("slot index outside table");
        u.row(i) += params_.ref_table.row(s.slot_index[i]);
        break;
      case RefEmbedding::rp:
        u.row(i) += (params_.rp.weight * Eigen::Vector3d(r[0], r[1], r[2]) + params_.rp.bias).transpose();
        break;
    }
  }
  const MatrixXd z = n > 0 ? project(u, params_.projector) : MatrixXd(0, d);

  MatrixXd x(T, d);
  Eigen::Index next = 0;
  for (int t = 0; t < T; ++t) {
    const int id = s.ids[t];
    x.row(t) = (id == kInjected ? z.row(next++) : params_.tok_emb.row(id)) + params_.pos_emb.row(t);
  }
  if (cache) {
    cache->u = std::move(u);
    cache->layers.assign(config_.layers, {});
  }

  for (int l = 0; l < config_.layers; ++l) {
    const LayerParams& L = params_.layers[l];
    Cache::Layer local;
    Cache::Layer& c = cache ? cache->layers[l] : local;
    c.x_in = x;
    layer_norm(x, L.ln1_g, L.ln1_b, c.a1, c.xhat1, c.rstd1);
    c.qkv = (c.a1 * L.w_qkv).rowwise() + L.b_qkv;
    c.attn.resize(T, d);
    c.probs.assign(H, MatrixXd());
    for (int h = 0; h < H; ++h) {
      const auto q = c.qkv.middleCols(h * dh, dh);
      const auto k = c.qkv.middleCols(d + h * dh, dh);
      const auto v = c.qkv.middleCols(2 * d + h * dh, dh);
      MatrixXd p = (q * k.transpose()) * scale;
      for (int i = 0; i < T; ++i) {
        const double m = p.row(i).head(i + 1).maxCoeff();
        double sum = 0.0;
        for (int j = 0; j <= i; ++j) sum += (p(i, j) = std::exp(p(i, j) - m));
        p.row(i).head(i + 1) /= sum;
        p.row(i).tail(T - i - 1).setZero();
      }
      c.attn.middleCols(h * dh, dh) = p * v;
      c.probs[h] = std::move(p);
    }
    c.x_mid = x + ((c.attn * L.w_o).rowwise() + L.b_o);
    layer_norm(c.x_mid, L.ln2_g, L.ln2_b, c.a2, c.xhat2, c.rstd2);
    c.h_pre = (c.a2 * L.w_fc).rowwise() + L.b_fc;
    c.h_act = c.h_pre.unaryExpr(&gelu);
    x = c.x_mid + ((c.h_act * L.w_out).rowwise() + L.b_out);
  }

  MatrixXd hf, xhatf;
  VectorXd rstdf;
  layer_norm(x, params_.lnf_g, params_.lnf_b, hf, xhatf, rstdf);
  if (cache) {
    cache->x_last = x;
    cache->xhatf = xhatf;
    cache->rstdf = rstdf;
    cache->hf = hf;
  }
  return hf;
}

MatrixXd Model::logits(const TokenStream& stream) const {
  return forward(stream, nullptr) * params_.tok_emb.transpose();
}

namespace {

std::vector<int> answer_targets(const TokenStream& s) {
  if (s.answer_begin == 0 || s.answer_begin >= s.size()) throw DomainError("stream has no answer tokens");
  return {s.ids.begin() + static_cast<std::ptrdiff_t>(s.answer_begin), s.ids.end()};
}

}  // namespace

double Model::loss(const TokenStream& stream) const {
  const auto targets = answer_targets(stream);
  const MatrixXd hf = forward(stream, nullptr);
  const auto rows = hf.middleRows(static_cast<Eigen::Index>(stream.answer_begin) - 1, targets.size());
  return cross_entropy(rows * params_.tok_emb.transpose(), targets);
}

double Model::loss_and_grad(const TokenStream& s, Params& g) const {
  const auto targets = answer_targets(s);
  Cache cache;
  const MatrixXd hf = forward(s, &cache);
  const int T = static_cast<int>(s.size());
  const int d = config_.d_llm, H = config_.heads, dh = d / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index first = static_cast<Eigen::Index>(s.answer_begin) - 1;
  const Eigen::Index m = static_cast<Eigen::Index>(targets.size());

  // Softmax cross-entropy on the answer rows through the tied head.
  const MatrixXd hsel = hf.middleRows(first, m);
  MatrixXd dlogits = hsel * params_.tok_emb.transpose();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mx = dlogits.row(i).maxCoeff();
    dlogits.row(i) = (dlogits.row(i).array() - mx).exp().matrix();
    const double sum = dlogits.row(i).sum();
    loss += std::log(sum) - (hsel.row(i).dot(params_.tok_emb.row(targets[i])) - mx);
    dlogits.row(i) /= sum;
    dlogits(i, targets[i]) -= 1.0;
  }
  loss /= static_cast<double>(m);
  dlogits /= static_cast<double>(m);
  g.tok_emb.noalias() += dlogits.transpose() * hsel;
  MatrixXd dhf = MatrixXd::Zero(T, d);
  dhf.middleRows(first, m) = dlogits * params_.tok_emb;

  MatrixXd dx = layer_norm_backward(dhf, cache.xhatf, cache.rstdf, params_.lnf_g, g.lnf_g, g.lnf_b);

  for (int l = config_.layers - 1; l >= 0; --l) {
    const LayerParams& L = params_.layers[l];
    LayerParams& G = g.layers[l];
    const Cache::Layer& c = cache.layers[l];

    // MLP branch.
    G.w_out.noalias() += c.h_act.transpose() * dx;
    G.b_out += dx.colwise().sum();
    MatrixXd dh_pre = dx * L.w_out.transpose();
    dh_pre.array() *= c.h_pre.unaryExpr(&gelu_grad).array();
    G.w_fc.noalias() += c.a2.transpose() * dh_pre;
    G.b_fc += dh_pre.colwise().sum();
    MatrixXd dx_mid = dx + layer_norm_backward(dh_pre * L.w_fc.transpose(), c.xhat2, c.rstd2, L.ln2_g, G.ln2_g, G.ln2_b);

    // Attention branch.
    G.w_o.noalias() += c.attn.transpose() * dx_mid;
    G.b_o += dx_mid.colwise().sum();
    const MatrixXd dattn = dx_mid * L.w_o.transpose();
    MatrixXd dqkv(T, 3 * d);
    for (int h = 0; h < H; ++h) {
      const auto q = c.qkv.middleCols(h * dh, dh);
      const auto k = c.qkv.middleCols(d + h * dh, dh);
      const auto v = c.qkv.middleCols(2 * d + h * dh, dh);
      const MatrixXd& p = c.probs[h];
      const auto dout = dattn.middleCols(h * dh, dh);
      const MatrixXd dp = dout * v.transpose();
      dqkv.middleCols(2 * d + h * dh, dh) = p.transpose() * dout;
      MatrixXd ds = p.array() * (dp.colwise() - (dp.array() * p.array()).rowwise().sum().matrix()).array();
      ds *= scale;
      dqkv.middleCols(h * dh, dh) = ds * k;
      dqkv.middleCols(d + h * dh, dh) = ds.transpose() * q;
    }
    G.w_qkv.noalias() += c.a1.transpose() * dqkv;
    G.b_qkv += dqkv.colwise().sum();
    dx = dx_mid + layer_norm_backward(dqkv * L.w_qkv.transpose(), c.xhat1, c.rstd1, L.ln1_g, G.ln1_g, G.ln1_b);
  }

  // Embeddings.
  const Eigen::Index n = s.injected.rows();
  MatrixXd dz(n, d);
  Eigen::Index next = 0;
  for (int t = 0; t < T; ++t) {
    g.pos_emb.row(t) += dx.row(t);
    if (s.ids[t] == kInjected) dz.row(next++) = dx.row(t);
    else g.tok_emb.row(s.ids[t]) += dx.row(t);
  }
  if (n > 0) {
    g.projector.weight.noalias() += dz.transpose() * cache.u;
    g.projector.bias += dz.colwise().sum().transpose();
    const MatrixXd du = dz * params_.projector.weight;
    if (config_.rp_embedding == RefEmbedding::rp) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = s.reference_points[i];
        g.rp.weight += du.row(i).transpose() * Eigen::RowVector3d(r[0], r[1], r[2]);
      }
      g.rp.bias += du.colwise().sum().transpose();
    } else if (config_.rp_embedding == RefEmbedding::learned) {
      for (Eigen::Index i = 0; i < n; ++i) g.ref_table.row(s.slot_index[i]) += du.row(i);
    }
  }
  return loss;
}

// ----- incremental decoding -------------------------------------------------------

InferenceSession::InferenceSession(const Model& model) : model_(model) {
  const auto& c = model.config();
  keys_.assign(c.layers, MatrixXd(c.context, c.d_llm));
  values_.assign(c.layers, MatrixXd(c.context, c.d_llm));
}

VectorXd InferenceSession::prefill(const TokenStream& stream) {
  model_.check_stream(stream);
  VectorXd out;
  Eigen::Index next = 0;
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const int id = stream.ids[t];
    if (id == kInjected) {
      out = step(model_.embed_position(id, stream.injected.row(next), stream.reference_points[next],
                                       stream.slot_index[next], static_cast<int>(length_)));
      ++next;
    } else {
      out = step(model_.embed_position(id, {}, {}, 0, static_cast<int>(length_)));
    }
  }
  return out;
}

VectorXd InferenceSession::push(int id) {
  if (id < 0 || id >= model_.vocab_size()) throw RangeError("token id " + std::to_string(id) + " outside vocabulary");
  return step(model_.embed_position(id, {}, {}, 0, static_cast<int>(length_)));
}

VectorXd InferenceSession::step(const Eigen::RowVectorXd& x_in) {
  const auto& c = model_.config();
  const auto& P = model_.params();
  if (static_cast<int>(length_) >= c.context) {
    throw RangeError("decoding past context " + std::to_string(c.context));
  }
  const int d = c.d_llm, H = c.heads, dh = d / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index t = static_cast<Eigen::Index>(length_);
  MatrixXd x = x_in;
  MatrixXd a, xhat;
  VectorXd rstd;
  for (int l = 0; l < c.layers; ++l) {
    const LayerParams& L = P.layers[l];
    layer_norm(x, L.ln1_g, L.ln1_b, a, xhat, rstd);
    const MatrixXd qkv = (a * L.w_qkv).rowwise() + L.b_qkv;
    keys_[l].row(t) = qkv.middleCols(d, d);
    values_[l].row(t) = qkv.middleCols(2 * d, d);
    Eigen::RowVectorXd attn(d);
    for (int h = 0; h < H; ++h) {
      const auto K = keys_[l].block(0, h * dh, t + 1, dh);
      const auto V = values_[l].block(0, h * dh, t + 1, dh);
      Eigen::RowVectorXd s = (qkv.middleCols(h * dh, dh) * K.transpose()) * scale;
      s = (s.array() - s.maxCoeff()).exp().matrix();
      s /= s.sum();
      attn.segment(h * dh, dh) = s * V;
    }
    x = x + ((attn * L.w_o) + L.b_o);
    layer_norm(x, L.ln2_g, L.ln2_b, a, xhat, rstd);
    const MatrixXd h_act = ((a * L.w_fc).rowwise() + L.b_fc).unaryExpr(&gelu);
    x = x + ((h_act * L.w_out).rowwise() + L.b_out);
  }
  layer_norm(x, P.lnf_g, P.lnf_b, a, xhat, rstd);
  ++length_;
  return P.tok_emb * a.row(0).transpose();
}

}  // namespace atlasbench::planner
