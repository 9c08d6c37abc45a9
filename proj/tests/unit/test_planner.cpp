#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "atlasbench/dataset.hpp"
#include "atlasbench/errors.hpp"
#include "atlasbench/planner/checkpoint.hpp"
#include "atlasbench/planner/generate.hpp"
#include "atlasbench/planner/train.hpp"
#include "atlasbench/scene_sim.hpp"
#include "support/generators.hpp"

using namespace atlasbench;
using namespace atlasbench::planner;

namespace {

PlannerConfig small_config() {
  PlannerConfig c;
  c.d_q = 8;
  c.d_llm = 16;
  c.layers = 1;
  c.heads = 2;
  c.context = 320;
  return c;
}

struct Fixture {
  std::vector<Scene> scenes = generate_scenes(500, 6);
  std::vector<QaPair> pairs = build_dataset(scenes, {});
  Vocab vocab;
  QueryGenerator generator;

  Fixture() : generator(query_config()) {
    std::vector<std::string> qs;
    for (const auto& p : pairs) qs.push_back(p.question);
    vocab = Vocab::build(qs);
  }
  static QueryGeneratorConfig query_config() {
    QueryGeneratorConfig c;
    c.dim = 8;
    c.top_k = 6;
    return c;
  }
  std::vector<TokenStream> streams(bool inject = true, bool answers = true) const {
    return build_streams(vocab, pairs, scenes, generator, inject, answers);
  }
};

}  // namespace

TEST_CASE("vocabulary layout") {
  const Vocab v;
  CHECK(v.token(Vocab::kBos) == "<bos>");
  CHECK(v.token(Vocab::kOpen) == "[");
  CHECK(v.token(Vocab::bin_id(0)) == "0");
  CHECK(v.token(Vocab::bin_id(999)) == "999");
  CHECK(v.id("car") == Vocab::kBinBase + Vocab::kBinCount);
  CHECK(v.id("no-such-token") == Vocab::kUnk);
  CHECK(v.size() == Vocab::kBinBase + Vocab::kBinCount + kCategoryCount);
}

TEST_CASE("vocabulary is a bijection and survives a token-list round trip") {
  const Fixture f;
  std::set<std::string> seen(f.vocab.tokens().begin(), f.vocab.tokens().end());
  CHECK(seen.size() == static_cast<std::size_t>(f.vocab.size()));
  for (int i = 0; i < f.vocab.size(); ++i) CHECK(f.vocab.id(f.vocab.token(i)) == i);
  CHECK(Vocab::from_tokens(f.vocab.tokens()) == f.vocab);
  auto broken = f.vocab.tokens();
  std::swap(broken[0], broken[1]);
  CHECK_THROWS_AS(Vocab::from_tokens(broken), DataError);
}

TEST_CASE("answer ids decode to the canonical answer text") {
  const Vocab v;
  Rng rng(1);
  for (const auto& chain : ChainSpec::ablation_orders()) {
    for (int i = 0; i < 50; ++i) {
      const auto text = render_planning_answer(gen::planning_answer(rng, chain), chain);
      CHECK(v.decode_answer(v.encode_answer(text)) == text);
    }
  }
  const auto det = render_detection_answer(gen::detection_answer(rng));
  CHECK(v.decode_answer(v.encode_answer(det)) == det);
  CHECK(v.encode_answer("WP [1234,1]")[2] == Vocab::kUnk);
}

TEST_CASE("question lexing") {
  const auto pieces = lex_question("Hi, embeddings<query>. Use [x, y]!");
  const std::vector<std::string> want{"Hi", ",", "embeddings", "<query>", ".", "Use", "[", "x", ",", "y", "]", "!"};
  CHECK(pieces == want);
}

TEST_CASE("stream assembly splices 3D tokens at the slots") {
  const Vocab v;
  const std::string q = "look <query> and <query> now";
  Rng rng(2);
  const std::vector<std::vector<QueryToken>> slots{gen::query_tokens(rng, 16, 8), gen::query_tokens(rng, 16, 8)};
  const auto s = assemble_stream(v, q, std::span<const std::vector<QueryToken>>(slots));
  // BOS + 3 words + 32 rows + ANS
  CHECK(s.size() == 1 + 3 + 32 + 1);
  CHECK(s.injected.rows() == 32);
  CHECK(s.ids[2] == kInjected);
  CHECK(s.ids[17] == kInjected);
  CHECK(s.ids[18] != kInjected);
  CHECK(s.slot_index[16] == 0);
  CHECK(s.answer_begin == s.size());

  const auto again = assemble_stream(v, q, std::span<const std::vector<QueryToken>>(slots));
  CHECK(again.ids == s.ids);
  CHECK(again.injected == s.injected);

  const auto plain = assemble_stream(v, "no slots here", std::span<const std::vector<QueryToken>>(), "WP [1,2]");
  CHECK(plain.injected.rows() == 0);
  CHECK(std::ranges::count(plain.ids, kInjected) == 0);
  CHECK(plain.ids.back() == Vocab::kEos);
  CHECK(plain.answer_length() == 7);  // WP [ 1 , 2 ] EOS

  CHECK_THROWS_AS(assemble_stream(v, q, std::span<const std::vector<QueryToken>>(slots.data(), 1)), ShapeError);
}

TEST_CASE("text-only streams drop the slots") {
  const Fixture f;
  const auto with = f.streams(true);
  const auto without = f.streams(false);
  for (std::size_t i = 0; i < with.size(); ++i) {
    CHECK(without[i].injected.rows() == 0);
    CHECK(with[i].size() == without[i].size() + static_cast<std::size_t>(with[i].injected.rows()));
  }
}

TEST_CASE("logit shape and causality") {
  const Fixture f;
  const Model m(small_config(), f.vocab.size(), 3);
  auto s = f.streams()[0];
  const Eigen::MatrixXd a = m.logits(s);
  CHECK(a.rows() == static_cast<Eigen::Index>(s.size()));
  CHECK(a.cols() == f.vocab.size());
  const std::size_t cut = s.answer_begin + 5;
  for (std::size_t t = cut + 1; t < s.size(); ++t) s.ids[t] = Vocab::bin_id(static_cast<int>(t % 1000));
  const Eigen::MatrixXd b = m.logits(s);
  CHECK((a.topRows(cut + 1) - b.topRows(cut + 1)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.bottomRows(2) - b.bottomRows(2)).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("doubling a weight changes the logits") {
  const Fixture f;
  Model m(small_config(), f.vocab.size(), 4);
  const auto s = f.streams()[1];
  const Eigen::MatrixXd a = m.logits(s);
  m.params().layers[0].w_fc *= 2.0;
  CHECK((m.logits(s) - a).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("context overflow is a range error") {
  const Fixture f;
  auto c = small_config();
  c.context = 16;
  const Model m(c, f.vocab.size(), 5);
  CHECK_THROWS_AS(m.logits(f.streams()[0]), RangeError);
}

TEST_CASE("cross-entropy against a scalar oracle") {
  Eigen::MatrixXd logits(3, 3);
  logits << 1.0, 2.0, 0.5, -1.0, 0.0, 3.0, 0.2, 0.2, 0.2;
  const std::vector<int> targets{1, 2, 0};
  double want = 0.0;
  for (int i = 0; i < 3; ++i) {
    double z = 0.0;
    for (int j = 0; j < 3; ++j) z += std::exp(logits(i, j));
    want += -std::log(std::exp(logits(i, targets[i])) / z);
  }
  CHECK(cross_entropy(logits, targets) == doctest::Approx(want / 3.0).epsilon(1e-12));

  CHECK(cross_entropy(Eigen::MatrixXd::Zero(2, 7), std::vector<int>{3, 5}) == doctest::Approx(std::log(7.0)));
  Eigen::MatrixXd sharp = Eigen::MatrixXd::Zero(1, 5);
  sharp(0, 2) = 100.0;
  CHECK(cross_entropy(sharp, std::vector<int>{2}) < 1e-40);
  CHECK_THROWS_AS(cross_entropy(Eigen::MatrixXd(0, 5), std::vector<int>{}), DomainError);
}

TEST_CASE("model loss equals uniform entropy when the output head is zero") {
  const Fixture f;
  Model m(small_config(), f.vocab.size(), 6);
  m.params().tok_emb.setZero();
  CHECK(m.loss(f.streams()[0]) == doctest::Approx(std::log(static_cast<double>(f.vocab.size()))).epsilon(1e-12));
  const auto question_only = f.streams(true, false)[0];
  CHECK_THROWS_AS(m.loss(question_only), DomainError);
}

TEST_CASE("zero-initialized reference-point projector matches the no-embedding model bit for bit") {
  const Fixture f;
  auto with = small_config();
  with.rp_embedding = RefEmbedding::rp;
  auto without = with;
  without.rp_embedding = RefEmbedding::none;
  const Model a(with, f.vocab.size(), 7), b(without, f.vocab.size(), 7);
  for (const auto& s : f.streams()) {
    CHECK(a.loss(s) == b.loss(s));
    CHECK(a.logits(s) == b.logits(s));
  }
}

TEST_CASE("incremental decoding reproduces the full forward pass") {
  const Fixture f;
  for (auto e : {RefEmbedding::rp, RefEmbedding::learned, RefEmbedding::sincos}) {
    auto c = small_config();
    c.rp_embedding = e;
    Model m(c, f.vocab.size(), 8);
    m.params().rp.weight.setConstant(0.01);
    const auto s = f.streams()[2];
    const Eigen::MatrixXd full = m.logits(s);
    InferenceSession session(m);
    TokenStream prefix = s;
    prefix.ids.resize(s.answer_begin);
    Eigen::VectorXd last = session.prefill(prefix);
    CHECK((last.transpose() - full.row(s.answer_begin - 1)).cwiseAbs().maxCoeff() <= 1e-10);
    for (std::size_t t = s.answer_begin; t < s.size(); ++t) {
      last = session.push(s.ids[t]);
      CHECK((last.transpose() - full.row(t)).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("greedy decoding is deterministic; sampling is deterministic per seed") {
  const Fixture f;
  const Model m(small_config(), f.vocab.size(), 9);
  const auto prompt = f.streams(true, false)[0];
  DecodeOptions o;
  o.max_tokens = 20;
  const auto a = generate(m, f.vocab, prompt, o);
  CHECK(generate(m, f.vocab, prompt, o).ids == a.ids);
  o.mode = DecodeOptions::Mode::sample;
  std::set<std::vector<int>> distinct;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    o.seed = seed;
    const auto g = generate(m, f.vocab, prompt, o);
    CHECK(generate(m, f.vocab, prompt, o).ids == g.ids);
    distinct.insert(g.ids);
  }
  CHECK(distinct.size() > 1);  // an untrained model samples nearly uniformly
  o.temperature = 0.0;
  CHECK_THROWS_AS(generate(m, f.vocab, prompt, o), DomainError);
}

TEST_CASE("decoding without EOS sets the truncation flag and still yields parseable-or-flagged text") {
  const Fixture f;
  Model m(small_config(), f.vocab.size(), 10);
  m.params().tok_emb.row(Vocab::kEos).setConstant(-50.0);  // EOS never wins
  DecodeOptions o;
  o.max_tokens = 7;
  const auto g = generate(m, f.vocab, f.streams(true, false)[0], o);
  CHECK(g.truncated);
  CHECK(g.ids.size() == 7);
  const auto parsed = parse_planning_answer(g.text, ChainSpec());
  if (!parsed.ok()) CHECK(parsed.error().offset <= g.text.size());
}

TEST_CASE("checkpoint round trip reproduces logits exactly") {
  const Fixture f;
  auto c = small_config();
  c.rp_embedding = RefEmbedding::learned;
  Model m(c, f.vocab.size(), 11);
  m.params().rp.weight.setConstant(-0.25);
  Checkpoint ck{c, {}, Fixture::query_config(), f.vocab, m.params(), 42};
  ck.train.seed = 99;
  std::stringstream ss;
  write_checkpoint(ck, ss);
  const std::string first = ss.str();
  const auto back = read_checkpoint(ss);
  CHECK(back.model == c);
  CHECK(back.train.seed == 99);
  CHECK(back.step == 42);
  CHECK(back.vocab == f.vocab);
  const Model m2(back.model, back.params, back.vocab.size());
  const auto s = f.streams()[3];
  CHECK(m2.logits(s) == m.logits(s));
  std::stringstream again;
  write_checkpoint(back, again);
  CHECK(again.str() == first);
}

TEST_CASE("malformed checkpoints are data errors") {
  std::stringstream bad("{\"format\": \"atlasbench-checkpoint\", \"version\": 1}");
  CHECK_THROWS_AS(read_checkpoint(bad), DataError);
  std::stringstream junk("not json");
  CHECK_THROWS_AS(read_checkpoint(junk), DataError);
}

TEST_CASE("learning-rate schedule") {
  TrainConfig c;
  const long total = 1000;  // warm-up is 30 steps
  CHECK(learning_rate(0, total, c) == 0.0);
  CHECK(learning_rate(30, total, c) == doctest::Approx(c.peak_lr()).epsilon(1e-15));
  CHECK(learning_rate(15, total, c) == doctest::Approx(c.peak_lr() / 2));
  CHECK(learning_rate(total, total, c) == 0.0);
  for (long s = 31; s < total; ++s) CHECK(learning_rate(s, total, c) <= learning_rate(s - 1, total, c));
  CHECK(learning_rate(515, total, c) == doctest::Approx(c.peak_lr() / 2));
}

TEST_CASE("training lowers the loss and is deterministic") {
  const Fixture f;
  const auto data = f.streams();
  TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 5;
  Model a(small_config(), f.vocab.size(), 12), b(small_config(), f.vocab.size(), 12);
  const auto sa = train(a, data, tc);
  const auto sb = train(b, data, tc);
  CHECK(sa.final_loss < sa.initial_loss);
  CHECK(sa.steps == static_cast<long>(data.size()) * 3);
  CHECK(sa.epoch_loss == sb.epoch_loss);
  CHECK(a.logits(data[0]) == b.logits(data[0]));
}

TEST_CASE("non-finite loss stops training with the step index") {
  const Fixture f;
  Model m(small_config(), f.vocab.size(), 13);
  m.params().lnf_b[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train(m, f.streams(), TrainConfig{});
    FAIL("expected a NumericError");
  } catch (const NumericError& e) {
    CHECK(e.step() == 0);
  }
  Model n(small_config(), f.vocab.size(), 13);
  TrainConfig tc;
  tc.lr = 1e300;  // the first real update overflows
  tc.lr_scale = 1e10;
  tc.grad_clip = 0.0;
  try {
    train(n, f.streams(), tc);
    FAIL("expected a NumericError");
  } catch (const NumericError& e) {
    CHECK(e.step() >= 1);
  }
  CHECK_THROWS_AS(train(n, std::span<const TokenStream>(), TrainConfig{}), DomainError);
}

TEST_CASE("run config parsing") {
  std::stringstream ini(
      "[model]\nchain = V-A-Y-P\nrp_embedding = sincos\nd_llm = 32\n[train]\nepochs = 3\nlr_scale = 50\n"
      "[queries]\nposition_noise = 0.1\n[eval]\nl2_convention = at-horizon\n");
  const auto c = parse_run_config(ini);
  CHECK(c.model.chain.to_string() == "V-A-Y-P");
  CHECK(c.model.rp_embedding == RefEmbedding::sincos);
  CHECK(c.model.d_llm == 32);
  CHECK(c.train.epochs == 3);
  CHECK(c.train.peak_lr() == doctest::Approx(1e-3));
  CHECK(c.queries.position_noise == 0.1);
  CHECK(c.l2 == L2Convention::at_horizon);

  std::stringstream unknown("[model]\nwidth = 3\n");
  CHECK_THROWS_AS(parse_run_config(unknown), ConfigError);
  std::stringstream bad("[train]\nepochs = many\n");
  CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  std::stringstream heads("[model]\nheads = 3\n");
  CHECK_THROWS_AS(parse_run_config(heads), ConfigError);
}
