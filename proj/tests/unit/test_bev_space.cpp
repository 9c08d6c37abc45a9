#include <doctest.h>

#include <cmath>
#include <limits>

#include "atlasbench/bev_space.hpp"
#include "atlasbench/errors.hpp"
#include "atlasbench/random.hpp"

using namespace atlasbench;

TEST_CASE("encode_bin at the range edges and center") {
  CHECK(encode_bin(-50.0).value() == 0);
  CHECK(encode_bin(50.0).value() == 999);
  CHECK(encode_bin(0.0).value() == 500);
}

TEST_CASE("encode_bin clamps out-of-range values into the terminal bins") {
  CHECK(encode_bin(-1e9).value() == 0);
  CHECK(encode_bin(73.0).value() == 999);
  CHECK(encode_bin(49.9999).value() == 999);
}

TEST_CASE("encode_bin rejects non-finite values") {
  CHECK_THROWS_AS(encode_bin(std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(encode_bin(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("decode_bin returns bin centers") {
  CHECK(decode_bin(BinIndex(0)) == doctest::Approx(-49.95).epsilon(1e-12));
  CHECK(decode_bin(BinIndex(999)) == doctest::Approx(49.95).epsilon(1e-12));
  CHECK(decode_bin(BinIndex(500)) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("bin indices outside the valid range are rejected") {
  CHECK_THROWS_AS(BinIndex(-1), DomainError);
  CHECK_THROWS_AS(BinIndex(1000), DomainError);
  const BinSpec coarse{-1.0, 1.0, 10, BinUnit::meters};
  CHECK_THROWS_AS(decode_bin(BinIndex(10), coarse), DomainError);
}

TEST_CASE("encode_point works componentwise") {
  CHECK(encode_point({0.0, 0.0}) == BinPair{BinIndex(500), BinIndex(500)});
  CHECK(encode_point({-50.0, -50.0}) == BinPair{BinIndex(0), BinIndex(0)});
  CHECK(encode_point({12.34, -7.6}) == BinPair{BinIndex(623), BinIndex(424)});
  const auto p = decode_point({BinIndex(623), BinIndex(424)});
  CHECK(p.x == doctest::Approx(12.35));
  CHECK(p.y == doctest::Approx(-7.55));
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(encode_bin(0.0, BinSpec{1.0, 1.0, 10, BinUnit::meters}), ConfigError);
  CHECK_THROWS_AS(encode_bin(0.0, BinSpec{0.0, 1.0, 0, BinUnit::meters}), ConfigError);
}

TEST_CASE("round trip error is bounded by half a bin width") {
  Rng rng(7);
  for (const auto& spec : {BinSpec::spatial(), BinSpec::velocity(), BinSpec::acceleration(), BinSpec::yaw()}) {
    const double bound = spec.width() / 2.0 + 1e-12;
    for (int i = 0; i < 20000; ++i) {
      const double v = rng.uniform(spec.lo, spec.hi);
      CHECK_LE(std::abs(decode_bin(encode_bin(v, spec), spec) - v), bound);
    }
  }
}

TEST_CASE("encode_bin is monotone") {
  Rng rng(11);
  for (int i = 0; i < 20000; ++i) {
    double a = rng.uniform(-60.0, 60.0);
    double b = rng.uniform(-60.0, 60.0);
    if (a > b) std::swap(a, b);
    CHECK_LE(encode_bin(a).value(), encode_bin(b).value());
  }
}

TEST_CASE("encode after decode is the identity on every bin") {
  for (const auto& spec : {BinSpec::spatial(), BinSpec::yaw(), BinSpec{-3.0, 7.0, 17, BinUnit::meters}}) {
    for (int b = 0; b < spec.n; ++b) {
      CHECK(encode_bin(decode_bin(BinIndex(b), spec), spec).value() == b);
    }
  }
}
