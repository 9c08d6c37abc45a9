#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "atlasbench/errors.hpp"
#include "atlasbench/metrics.hpp"
#include "atlasbench/qa_codec.hpp"
#include "atlasbench/scene_sim.hpp"
#include "support/generators.hpp"

using namespace atlasbench;

namespace {

Trajectory straight(double step) {
  Trajectory t;
  for (int k = 0; k < kPlanLength; ++k) t[k] = {0.0, step * (k + 1)};
  return t;
}

/// Seven frames, ego parked at the world origin facing +y so world and ego frames coincide.
Scene parked_scene(std::vector<std::pair<int, AgentBox>> agents) {
  Scene s;
  s.id = "hand";
  for (int t = 0; t < 7; ++t) {
    Frame f;
    f.timestamp = t * kFrameDt;
    s.frames.push_back(f);
  }
  for (auto& [t, a] : agents) s.frames[t].agents.push_back(a);
  return s;
}

AgentBox box_at(BevPoint c, double heading = 0.0) {
  AgentBox a;
  a.center = c;
  a.heading = heading;
  return a;
}

/// Maximum-cardinality matching by exhaustive search; small inputs only.
int optimal_matches(const std::vector<std::vector<double>>& d, double thr) {
  const int n = static_cast<int>(d.size());
  const int m = n ? static_cast<int>(d[0].size()) : 0;
  std::function<int(int, unsigned)> best = [&](int i, unsigned used) -> int {
    if (i == n) return 0;
    int b = best(i + 1, used);
    for (int j = 0; j < m; ++j) {
      if (!(used & (1u << j)) && d[i][j] <= thr) b = std::max(b, 1 + best(i + 1, used | (1u << j)));
    }
    return b;
  };
  return best(0, 0);
}

}  // namespace

TEST_CASE("L2 of identical trajectories is zero") {
  const auto t = straight(1.0);
  const auto h = l2_horizons(t, t);
  CHECK(h.h1 == 0.0);
  CHECK(h.h2 == 0.0);
  CHECK(h.h3 == 0.0);
  CHECK(h.avg == 0.0);
}

TEST_CASE("L2 of a constant (0.3, 0.4) offset is 0.5 everywhere") {
  const auto gt = straight(1.3);
  Trajectory pred = gt;
  for (auto& p : pred) p = p + Vec2{0.3, 0.4};
  const auto h = l2_horizons(pred, gt);
  CHECK(std::abs(h.h1 - 0.5) <= 1e-12);
  CHECK(std::abs(h.h2 - 0.5) <= 1e-12);
  CHECK(std::abs(h.h3 - 0.5) <= 1e-12);
  CHECK(std::abs(h.avg - 0.5) <= 1e-12);
}

TEST_CASE("L2 with a single error at the last waypoint") {
  const auto gt = straight(2.0);
  Trajectory pred = gt;
  pred[5] = pred[5] + Vec2{0.0, 0.6};
  const auto h = l2_horizons(pred, gt);
  CHECK(h.h1 == 0.0);
  CHECK(h.h2 == 0.0);
  CHECK(std::abs(h.h3 - 0.1) <= 1e-12);
  const auto at = l2_horizons(pred, gt, L2Convention::at_horizon);
  CHECK(std::abs(at.h3 - 0.6) <= 1e-12);
  CHECK(at.h1 == 0.0);
}

TEST_CASE("L2 rejects wrong lengths") {
  std::vector<BevPoint> five(5), six(6);
  CHECK_THROWS_AS(l2_horizons(five, six), ShapeError);
}

TEST_CASE("L2 is translation invariant and scales linearly") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    Trajectory a, b;
    for (int k = 0; k < kPlanLength; ++k) {
      a[k] = {rng.uniform(-20, 20), rng.uniform(-20, 20)};
      b[k] = {rng.uniform(-20, 20), rng.uniform(-20, 20)};
    }
    const Vec2 shift{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const double s = rng.uniform(0.1, 3.0);
    Trajectory as = a, bs = b, ak = a, bk = b;
    for (int k = 0; k < kPlanLength; ++k) {
      as[k] = a[k] + shift;
      bs[k] = b[k] + shift;
      ak[k] = a[k] * s;
      bk[k] = b[k] * s;
    }
    const auto h = l2_horizons(a, b);
    CHECK(l2_horizons(as, bs).avg == doctest::Approx(h.avg).epsilon(1e-9));
    CHECK(l2_horizons(ak, bk).avg == doctest::Approx(s * h.avg).epsilon(1e-9));
    CHECK(h.avg == doctest::Approx((h.h1 + h.h2 + h.h3) / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("plan headings follow chords and survive zero-length steps") {
  Trajectory t = straight(1.0);
  auto h = plan_headings(t);
  for (double a : h) CHECK(a == doctest::Approx(M_PI_2));
  t[2] = t[1];  // stop for one step
  t[3] = t[1] + Vec2{1.0, 0.0};
  h = plan_headings(t);
  CHECK(h[2] == doctest::Approx(M_PI_2));
  CHECK(h[3] == doctest::Approx(0.0));
  CHECK(plan_headings(Trajectory{})[0] == doctest::Approx(M_PI_2));
}

TEST_CASE("far agents never collide") {
  const Scene s = parked_scene({{1, box_at({30, 0})}, {3, box_at({-25, 10})}, {6, box_at({0, -40})}});
  const PlanSample p{straight(1.0), &s, 0};
  const auto r = collision_rate(std::span(&p, 1));
  CHECK(r.h1 == 0.0);
  CHECK(r.h3 == 0.0);
  CHECK(r.avg == 0.0);
}

TEST_CASE("an agent on the first waypoint collides at every horizon") {
  const Scene s = parked_scene({{1, box_at({0, 1})}});
  const PlanSample p{straight(1.0), &s, 0};
  const auto r = collision_rate(std::span(&p, 1));
  CHECK(r.h1 == 100.0);
  CHECK(r.h2 == 100.0);
  CHECK(r.h3 == 100.0);
}

TEST_CASE("late collision counts only at the 3 s horizon") {
  // Waypoint 6 at y=6; an agent there at frame 6 only.
  const Scene s = parked_scene({{6, box_at({0, 6})}});
  std::vector<PlanSample> ps{{straight(1.0), &s, 0}, {Trajectory{}, &s, 0}};
  const auto r = collision_rate(ps);
  CHECK(r.h1 == 0.0);
  CHECK(r.h2 == 0.0);
  CHECK(r.h3 == 50.0);
  CHECK(r.avg == doctest::Approx(50.0 / 3.0));
}

TEST_CASE("agents are checked at the waypoint's own timestamp") {
  // The agent sits on waypoint 1's spot, but only at frame 4.
  const Scene s = parked_scene({{4, box_at({0, 1})}});
  const PlanSample p{straight(1.0), &s, 0};
  CHECK(collision_rate(std::span(&p, 1)).h3 == 0.0);
}

TEST_CASE("missing future frames are a data error naming the frame") {
  const Scene s = parked_scene({});
  const PlanSample p{straight(1.0), &s, 2};
  try {
    collision_rate(std::span(&p, 1));
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("frame 7") != std::string::npos);
  }
}

TEST_CASE("collision footprint gap of one centimeter") {
  // Ego footprint 4.084 x 1.85 heading +y at (0, 1); agent axis-aligned 4.5 x 1.9 beside it.
  const double half = 1.85 / 2 + 1.9 / 2;
  for (double d : {0.01, -0.01}) {
    const Scene s = parked_scene({{1, box_at({half + d, 1.0}, M_PI_2)}});
    const PlanSample p{straight(1.0), &s, 0};
    CHECK(collision_rate(std::span(&p, 1)).h1 == (d > 0 ? 0.0 : 100.0));
  }
}

TEST_CASE("collision rate ignores agent order and rigid motion of the world") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Scene s = generate_scene(seed);
    const int t0 = planning_frames(s).front();
    Trajectory plan = ground_truth_plan(s, t0);
    for (auto& p : plan) p = p * 1.7 + Vec2{0.5, 0.0};  // something that may collide
    const auto base = waypoint_collisions(plan, s, t0);

    Scene shuffled = s;
    for (auto& f : shuffled.frames) std::reverse(f.agents.begin(), f.agents.end());
    CHECK(waypoint_collisions(plan, shuffled, t0) == base);

    const Scene moved = transform_scene(s, 0.7, {3.0, -2.0});
    CHECK(waypoint_collisions(plan, moved, t0) == base);
  }
}

TEST_CASE("rect_intersects agrees with a rasterization oracle") {
  Rng rng(3);
  int compared = 0, agree = 0;
  for (int i = 0; i < 300; ++i) {
    const auto a = gen::rect(rng, 2.0), b = gen::rect(rng, 2.0);
    if (gen::near_boundary(a, b, 0.02)) continue;
    ++compared;
    agree += rect_intersects(a, b) == gen::raster_overlap(a, b, 0.01);
  }
  CHECK(compared > 200);
  CHECK(agree >= 0.999 * compared);
}

TEST_CASE("f1_from_pr reproduces published detection and lane rows") {
  CHECK(std::abs(f1_from_pr(22.7, 41.3) - 29.3) <= 0.05);
  CHECK(std::abs(f1_from_pr(27.2, 74.0) - 39.8) <= 0.05);
  CHECK(std::abs(f1_from_pr(50.6, 55.7) - 53.0) <= 0.05);
  CHECK(f1_from_pr(0.0, 0.0) == 0.0);
}

TEST_CASE("F1 harmonic bounds") {
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform(1e-6, 1.0), r = rng.uniform(1e-6, 1.0);
    const double f = f1_from_pr(p, r);
    CHECK(f >= std::min(p, r) - 1e-15);
    CHECK(f <= 2.0 * std::min(p, r) + 1e-15);
    CHECK(std::abs(f - 2 * p * r / (p + r)) <= 1e-12);
  }
}

TEST_CASE("detection F1 of perfect predictions") {
  const std::vector<Detection> gts{{Category::car, {1, 2}}, {Category::pedestrian, {-3, 4}}, {Category::car, {10, 0}}};
  for (double thr : kDetectionThresholds) {
    const auto r = detection_f1(gts, gts, thr);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
  }
  CHECK_THROWS_AS(detection_f1(gts, gts, 0.0), DomainError);
}

TEST_CASE("detection matching needs the same category and the threshold") {
  const std::vector<Detection> gts{{Category::car, {0, 0}}};
  CHECK(detection_f1(std::vector<Detection>{{Category::truck, {0, 0}}}, gts, 4.0).true_positives == 0);
  CHECK(detection_f1(std::vector<Detection>{{Category::car, {0, 0.6}}}, gts, 0.5).true_positives == 0);
  CHECK(detection_f1(std::vector<Detection>{{Category::car, {0, 0.6}}}, gts, 1.0).true_positives == 1);
  const auto none = detection_f1(std::vector<Detection>{}, gts, 1.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("greedy matching is one-to-one and deterministic on ties") {
  const std::vector<std::vector<double>> d{{1.0, 1.0}, {1.0, 1.0}};
  const auto m = greedy_match(d, 2.0);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == std::pair{0, 0});
  CHECK(m[1] == std::pair{1, 1});
}

TEST_CASE("swapping predictions and ground truth swaps precision and recall") {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    std::vector<Detection> a, b;
    for (int k = rng.uniform_int(0, 8); k > 0; --k) a.push_back({static_cast<Category>(rng.uniform_int(0, 2)), {rng.uniform(-5, 5), rng.uniform(-5, 5)}});
    for (int k = rng.uniform_int(0, 8); k > 0; --k) b.push_back({static_cast<Category>(rng.uniform_int(0, 2)), {rng.uniform(-5, 5), rng.uniform(-5, 5)}});
    const auto ab = detection_f1(a, b, 2.0), ba = detection_f1(b, a, 2.0);
    CHECK(ab.precision == ba.recall);
    CHECK(ab.recall == ba.precision);
  }
}

TEST_CASE("greedy matching stays close to optimal on realistic detection sets") {
  // Noisy copies of simulated targets, like the perception answers being scored.
  Rng rng(6);
  int greedy = 0, optimal = 0;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const Scene s = generate_scene(seed);
    const auto gts = detection_targets(s.frames[2]);
    std::vector<Detection> preds;
    for (const auto& [c, p] : gts) {
      if (rng.bernoulli(0.15)) continue;
      preds.push_back({c, p + Vec2{rng.normal(0, 0.6), rng.normal(0, 0.6)}});
    }
    for (std::size_t cat = 0; cat < kCategoryCount; ++cat) {
      std::vector<BevPoint> pc, gc;
      for (const auto& [c, p] : preds) if (static_cast<std::size_t>(c) == cat) pc.push_back(p);
      for (const auto& [c, p] : gts) if (static_cast<std::size_t>(c) == cat) gc.push_back(p);
      if (gc.size() > 12) continue;
      std::vector<std::vector<double>> d(pc.size(), std::vector<double>(gc.size()));
      for (std::size_t i = 0; i < pc.size(); ++i)
        for (std::size_t j = 0; j < gc.size(); ++j) d[i][j] = distance(pc[i], gc[j]);
      greedy += static_cast<int>(greedy_match(d, 1.0).size());
      optimal += optimal_matches(d, 1.0);
    }
  }
  REQUIRE(optimal > 0);
  CHECK(greedy <= optimal);
  CHECK(greedy >= 0.99 * optimal);
}

TEST_CASE("Frechet distance basics") {
  const std::vector<BevPoint> a{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  std::vector<BevPoint> b = a;
  CHECK(frechet(a, a) == 0.0);
  for (auto& p : b) p = p + Vec2{0, 1.5};
  CHECK(frechet(a, b) == doctest::Approx(1.5));
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    std::vector<BevPoint> x(rng.uniform_int(1, 6)), y(rng.uniform_int(1, 6));
    for (auto& p : x) p = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (auto& p : y) p = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    CHECK(frechet(x, y) == frechet(y, x));
    // Bounded below by the endpoint distances.
    CHECK(frechet(x, y) >= std::max(distance(x.front(), y.front()), distance(x.back(), y.back())));
  }
  CHECK_THROWS_AS(frechet(std::vector<BevPoint>{}, a), DomainError);
}

TEST_CASE("resampling keeps endpoints and spaces points evenly") {
  const std::vector<BevPoint> l{{0, 0}, {1, 0}, {1, 3}};
  const auto r = resample_polyline(l, 5);
  REQUIRE(r.size() == 5);
  CHECK(r.front() == l.front());
  CHECK(r.back().x == doctest::Approx(1.0));
  CHECK(r.back().y == doctest::Approx(3.0));
  for (int k = 1; k < 5; ++k) CHECK(distance(r[k - 1], r[k]) <= 1.0 + 1e-9);
  CHECK(r[2].x == doctest::Approx(1.0));
  CHECK(r[2].y == doctest::Approx(1.0));
}

TEST_CASE("lane F1") {
  const std::vector<std::array<BevPoint, 4>> gts{{BevPoint{0, 0}, {0, 5}, {0, 10}, {0, 15}}};
  CHECK(lane_f1(gts, gts).f1 == 1.0);
  auto shifted = gts;
  for (auto& p : shifted[0]) p = p + Vec2{5.0, 0.0};
  const auto r = lane_f1(shifted, gts);
  CHECK(r.f1 == 0.0);
  for (const auto& t : r.per_threshold) CHECK(t.f1 == 0.0);
  // 1.5 m offset: matched at 2 and 3 m only, so the mean is 2/3.
  for (auto& p : shifted[0]) p = p + Vec2{-3.5, 0.0};
  CHECK(lane_f1(shifted, gts).f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("PR curve basics") {
  const std::vector<Detection> gts{{Category::car, {0, 0}}};
  const std::vector<ScoredDetection> one{{Category::car, {0, 0.1}, 0.9}};
  const auto c = pr_curve(one, gts, 1.0);
  REQUIRE(c.size() == 1);
  CHECK(*c[0].confidence_cut == 0.9);
  CHECK(c[0].precision == 1.0);
  CHECK(c[0].recall == 1.0);

  const std::vector<ScoredDetection> plain{{Category::car, {0, 0.1}, std::nullopt}, {Category::bus, {3, 3}, std::nullopt}};
  const auto d = pr_curve(plain, gts, 1.0);
  REQUIRE(d.size() == 1);
  CHECK_FALSE(d[0].confidence_cut.has_value());
  const std::vector<Detection> pd{{Category::car, {0, 0.1}}, {Category::bus, {3, 3}}};
  const auto ref = detection_f1(pd, gts, 1.0);
  CHECK(d[0].precision == ref.precision);
  CHECK(d[0].recall == ref.recall);
}

TEST_CASE("PR curve recall never decreases as the cut drops") {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<DetectionSample> samples(3);
    for (auto& s : samples) {
      for (int k = rng.uniform_int(0, 10); k > 0; --k)
        s.gts.push_back({static_cast<Category>(rng.uniform_int(0, 1)), {rng.uniform(-6, 6), rng.uniform(-6, 6)}});
      for (int k = rng.uniform_int(0, 12); k > 0; --k)
        s.preds.push_back({static_cast<Category>(rng.uniform_int(0, 1)), {rng.uniform(-6, 6), rng.uniform(-6, 6)},
                           rng.uniform_int(0, 20) / 20.0});
    }
    const auto c = pr_curve(samples, 2.0);
    for (std::size_t i = 1; i < c.size(); ++i) {
      CHECK(*c[i].confidence_cut < *c[i - 1].confidence_cut);
      CHECK(c[i].recall >= c[i - 1].recall);
    }
  }
}
