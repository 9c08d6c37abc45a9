#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "atlasbench/errors.hpp"
#include "atlasbench/query_generator.hpp"
#include "atlasbench/scene_sim.hpp"
#include "atlasbench/tokenizer_core.hpp"
#include "support/generators.hpp"

using namespace atlasbench;

TEST_CASE("fresh reference-point projector leaves embeddings untouched") {
  Rng rng(1);
  auto qs = gen::query_tokens(rng, 20, 32);
  const RefPointProjector rp(32);
  const Eigen::MatrixXd base = embed_tokens(qs, rp);
  CHECK(base == stack_embeddings(qs, 32));
  for (auto& q : qs) q.reference_point = {rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3)};
  CHECK(embed_tokens(qs, rp) == base);
}

TEST_CASE("reference-point term adds weight * point + bias") {
  Rng rng(2);
  auto qs = gen::query_tokens(rng, 3, 4);
  RefPointProjector rp(4);
  rp.weight.col(0) = Eigen::Vector4d(1, 2, 3, 4);
  qs[1].reference_point = {1.0, 0.0, 0.0};
  const Eigen::MatrixXd out = embed_tokens(qs, rp);
  CHECK((out.row(1) - qs[1].embedding.transpose()).isApprox(Eigen::RowVector4d(1, 2, 3, 4)));
}

TEST_CASE("embed_tokens shapes") {
  CHECK(embed_tokens({}, RefPointProjector(8)).rows() == 0);
  CHECK(embed_tokens({}, RefPointProjector(8)).cols() == 8);
  Rng rng(3);
  auto qs = gen::query_tokens(rng, 2, 8);
  qs[1].embedding = Eigen::VectorXd::Zero(7);
  CHECK_THROWS_AS(embed_tokens(qs, RefPointProjector(8)), ShapeError);
}

TEST_CASE("project matches a naive dot-product oracle") {
  Rng rng(4);
  Projector p(5, 3);
  for (int i = 0; i < 5; ++i) {
    p.bias[i] = rng.normal();
    for (int j = 0; j < 3; ++j) p.weight(i, j) = rng.normal();
  }
  Eigen::MatrixXd z(4, 3);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) z(i, j) = rng.normal();
  }
  const Eigen::MatrixXd out = project(z, p);
  REQUIRE(out.rows() == 4);
  REQUIRE(out.cols() == 5);
  for (int r = 0; r < 4; ++r) {
    for (int o = 0; o < 5; ++o) {
      double s = p.bias[o];
      for (int j = 0; j < 3; ++j) s += p.weight(o, j) * z(r, j);
      CHECK(out(r, o) == doctest::Approx(s).epsilon(1e-12));
    }
  }
  CHECK(project(Eigen::MatrixXd(0, 3), p).rows() == 0);
  CHECK(project(z, Projector(5, 3)).isZero(0.0));
  CHECK_THROWS_AS(project(Eigen::MatrixXd(2, 4), p), ShapeError);
}

TEST_CASE("top-k keeps the largest confidences with stable ties") {
  Rng rng(5);
  const auto qs = gen::query_tokens(rng, 300, 2, true, true);
  const auto top = select_top_k(qs, 256);
  REQUIRE(top.size() == 256);
  std::vector<std::size_t> idx(qs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return *qs[a].confidence > *qs[b].confidence; });
  for (std::size_t i = 0; i < 256; ++i) CHECK(top[i].embedding == qs[idx[i]].embedding);
}

TEST_CASE("memory queue is FIFO over depth frames") {
  MemoryQueue q(3, 256);
  Rng rng(6);
  std::vector<std::vector<QueryToken>> frames;
  for (int f = 0; f < 5; ++f) {
    frames.push_back(gen::query_tokens(rng, 2, 2));
    q.push(frames.back());
  }
  REQUIRE(q.slots().size() == 3);
  for (int s = 0; s < 3; ++s) CHECK(q.slots()[s][0].embedding == select_top_k(frames[s + 2], 256)[0].embedding);
}

TEST_CASE("memory context puts the oldest frame first and current last") {
  MemoryQueue q(3, 256);
  Rng rng(7);
  CHECK(q.context({}).empty());
  const auto current = gen::query_tokens(rng, 4, 2);
  CHECK(q.context(current).size() == 4);
  const auto old = gen::query_tokens(rng, 1, 2);
  q.push(old);
  q.push(gen::query_tokens(rng, 2, 2));
  const auto ctx = q.context(current);
  REQUIRE(ctx.size() == 7);
  CHECK(ctx.front().embedding == old[0].embedding);
  CHECK(ctx.back().embedding == current.back().embedding);
}

TEST_CASE("empty frames occupy a slot") {
  MemoryQueue q(3, 256);
  Rng rng(8);
  q.push(gen::query_tokens(rng, 3, 2));
  q.push({});
  q.push({});
  q.push({});
  CHECK(q.slots().size() == 3);
  CHECK(q.context({}).empty());
}

TEST_CASE("token budget for the default queue fits the prompt cap") {
  CHECK(injected_token_budget(3, 256, 2) == 2048);
  CHECK(injected_token_budget(3, 256, 2) < 4096);
}

TEST_CASE("reference embedding names") {
  CHECK(parse_ref_embedding("rp") == RefEmbedding::rp);
  CHECK(parse_ref_embedding("sin-cos") == RefEmbedding::sincos);
  CHECK_FALSE(parse_ref_embedding("fourier").has_value());
  CHECK(to_string(RefEmbedding::learned) == "learned");
}

TEST_CASE("sin-cos code is bounded and position dependent") {
  const auto a = sincos_code({1.0, 2.0, 0.0}, 32);
  const auto b = sincos_code({1.5, 2.0, 0.0}, 32);
  CHECK(a.size() == 32);
  CHECK(a.cwiseAbs().maxCoeff() <= 1.0);
  CHECK_FALSE(a.isApprox(b));
}

TEST_CASE("query generator is deterministic and honours top-k and memory depth") {
  const Scene s = generate_scene(5);
  QueryGeneratorConfig c;
  c.top_k = 4;
  const QueryGenerator g(c);
  const auto a = g.slot_queries(s, 3);
  const auto b = g.slot_queries(s, 3);
  REQUIRE(a.detection.size() == b.detection.size());
  for (std::size_t i = 0; i < a.detection.size(); ++i) CHECK(a.detection[i].embedding == b.detection[i].embedding);
  CHECK(a.detection.size() <= 4 * (3 + 1));
  for (const auto& q : a.detection) {
    CHECK(q.embedding.size() == 32);
    REQUIRE(q.confidence.has_value());
    CHECK(*q.confidence > 0.0);
    CHECK(*q.confidence <= 1.0);
  }
  for (const auto& q : a.map) CHECK_FALSE(q.confidence.has_value());
  // Frame 0 has no past: only current-frame queries.
  CHECK(g.slot_queries(s, 0).detection.size() == std::min<std::size_t>(4, g.detection_queries(s, 0).size()));
}

TEST_CASE("noise-free detection queries sit on the targets") {
  const Scene s = generate_scene(6);
  QueryGeneratorConfig c;
  c.position_noise = 0.0;
  c.velocity_noise = 0.0;
  const QueryGenerator g(c);
  const auto qs = g.detection_queries(s, 2);
  const auto targets = detection_targets(s.frames[2]);
  REQUIRE(qs.size() == targets.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CHECK(qs[i].reference_point[0] == doctest::Approx(targets[i].second.x));
    CHECK(qs[i].reference_point[1] == doctest::Approx(targets[i].second.y));
    CHECK(*qs[i].confidence == 1.0);
  }
}
