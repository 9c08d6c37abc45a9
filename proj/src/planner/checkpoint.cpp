#include "atlasbench/planner/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "atlasbench/errors.hpp"

namespace atlasbench::planner {

using nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::size_t n = std::min<std::size_t>(3, bytes.size() - i);
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 3; ++k) v = (v << 8) | (k < n ? bytes[i + k] : 0);
    for (std::size_t k = 0; k < 4; ++k) out += k <= n ? kAlphabet[(v >> (18 - 6 * k)) & 63] : '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw DataError("base64 data length is not a multiple of 4");
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int x = value(c);
      if (x < 0 || pad > 0) throw DataError("invalid base64 character");
      v = (v << 6) | static_cast<std::uint32_t>(x);
    }
    for (int k = 0; k < 3 - pad; ++k) out.push_back(static_cast<unsigned char>((v >> (16 - 8 * k)) & 0xff));
  }
  return out;
}

std::string encode_tensor(const TensorView& t) {
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(t.size()) * 8);
  // Row-major on disk regardless of the in-memory layout.
  const Eigen::Map<const Eigen::MatrixXd> m(t.data, t.rows, t.cols);
  for (Eigen::Index r = 0; r < t.rows; ++r) {
    for (Eigen::Index c = 0; c < t.cols; ++c) {
      const auto bits = std::bit_cast<std::uint64_t>(m(r, c));
      for (int k = 0; k < 8; ++k) bytes.push_back(static_cast<unsigned char>(bits >> (8 * k)));
    }
  }
  return base64_encode(bytes);
}

void decode_tensor(const std::string& data, const TensorView& t) {
  const auto bytes = base64_decode(data);
  if (bytes.size() != static_cast<std::size_t>(t.size()) * 8) {
    throw DataError("tensor '" + t.name + "' has " + std::to_string(bytes.size() / 8) + " values, expected " +
                    std::to_string(t.size()));
  }
  Eigen::Map<Eigen::MatrixXd> m(t.data, t.rows, t.cols);
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < t.rows; ++r) {
    for (Eigen::Index c = 0; c < t.cols; ++c) {
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[at++]) << (8 * k);
      m(r, c) = std::bit_cast<double>(bits);
    }
  }
}

PlannerConfig planner_from_json(const json& j) {
  PlannerConfig c;
  c.d_q = j.at("d_q");
  c.d_llm = j.at("d_llm");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.context = j.at("context");
  c.mlp_ratio = j.at("mlp_ratio");
  c.chain = ChainSpec::parse(j.at("chain").get<std::string>());
  auto e = parse_ref_embedding(j.at("rp_embedding").get<std::string>());
  if (!e) throw DataError("unknown rp_embedding in checkpoint");
  c.rp_embedding = *e;
  c.inject_queries = j.at("inject_queries");
  c.bin_init_scale = j.at("bin_init_scale");
  return c;
}

TrainConfig train_from_json(const json& j) {
  TrainConfig c;
  c.lr = j.at("lr");
  c.lr_scale = j.at("lr_scale");
  c.weight_decay = j.at("weight_decay");
  c.beta1 = j.at("beta1");
  c.beta2 = j.at("beta2");
  c.eps = j.at("eps");
  c.warmup_fraction = j.at("warmup_fraction");
  c.grad_clip = j.at("grad_clip");
  c.epochs = j.at("epochs");
  c.seed = j.at("seed");
  return c;
}

QueryGeneratorConfig queries_from_json(const json& j) {
  QueryGeneratorConfig c;
  c.dim = j.at("dim");
  c.position_noise = j.at("position_noise");
  c.velocity_noise = j.at("velocity_noise");
  c.featurizer_seed = j.at("featurizer_seed");
  c.memory_depth = j.at("memory_depth");
  c.top_k = j.at("top_k");
  return c;
}

}  // namespace

json to_json(const PlannerConfig& c) {
  return {{"d_q", c.d_q},
          {"d_llm", c.d_llm},
          {"layers", c.layers},
          {"heads", c.heads},
          {"context", c.context},
          {"mlp_ratio", c.mlp_ratio},
          {"chain", c.chain.to_string()},
          {"rp_embedding", std::string(to_string(c.rp_embedding))},
          {"inject_queries", c.inject_queries},
          {"bin_init_scale", c.bin_init_scale}};
}

json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"lr_scale", c.lr_scale},
          {"weight_decay", c.weight_decay},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"warmup_fraction", c.warmup_fraction},
          {"grad_clip", c.grad_clip},
          {"epochs", c.epochs},
          {"seed", c.seed}};
}

json to_json(const QueryGeneratorConfig& c) {
  return {{"dim", c.dim},
          {"position_noise", c.position_noise},
          {"velocity_noise", c.velocity_noise},
          {"featurizer_seed", c.featurizer_seed},
          {"memory_depth", c.memory_depth},
          {"top_k", c.top_k}};
}

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  json j;
  j["format"] = "atlasbench-checkpoint";
  j["version"] = 1;
  j["model"] = to_json(ckpt.model);
  j["train"] = to_json(ckpt.train);
  j["queries"] = to_json(ckpt.queries);
  j["vocab"] = ckpt.vocab.tokens();
  j["step"] = ckpt.step;
  json tensors = json::array();
  // tensors() needs mutable access for its views; nothing is written through them here.
  for (const auto& t : const_cast<Params&>(ckpt.params).tensors()) {
    tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}, {"data", encode_tensor(t)}});
  }
  j["tensors"] = std::move(tensors);
  out << j.dump() << '\n';
}

Checkpoint read_checkpoint(std::istream& in) {
  try {
    const json j = json::parse(in);
    if (j.at("format") != "atlasbench-checkpoint") throw DataError("not an atlasbench checkpoint");
    if (j.at("version") != 1) throw DataError("unsupported checkpoint version");
    Checkpoint c;
    c.model = planner_from_json(j.at("model"));
    c.train = train_from_json(j.at("train"));
    c.queries = queries_from_json(j.at("queries"));
    c.vocab = Vocab::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    c.step = j.at("step");
    c.model.validate();
    c.params = Params::zeros(c.model, c.vocab.size());
    auto views = c.params.tensors();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != views.size()) throw DataError("checkpoint tensor count does not match the model");
    for (std::size_t i = 0; i < views.size(); ++i) {
      const auto& t = tensors[i];
      if (t.at("name") != views[i].name) {
        throw DataError("expected tensor '" + views[i].name + "', found '" + t.at("name").get<std::string>() + "'");
      }
      const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
      if (shape.size() != 2 || shape[0] != views[i].rows || shape[1] != views[i].cols) {
        throw DataError("tensor '" + views[i].name + "' has the wrong shape");
      }
      decode_tensor(t.at("data").get<std::string>(), views[i]);
    }
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(ckpt, out);
  if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace atlasbench::planner
