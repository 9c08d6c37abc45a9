#pragma once

#include <array>
#include <cmath>
#include <string_view>
#include <utility>

namespace atlasbench {

/// Point in the bird's-eye-view plane. x points right, y points forward.
struct BevPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const BevPoint&, const BevPoint&) = default;
  BevPoint operator+(const BevPoint& o) const { return {x + o.x, y + o.y}; }
  BevPoint operator-(const BevPoint& o) const { return {x - o.x, y - o.y}; }
  BevPoint operator*(double s) const { return {x * s, y * s}; }
};

inline double distance(const BevPoint& a, const BevPoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Index of a uniform bin, always within [0, kBinCount).
class BinIndex {
 public:
  static constexpr int kMax = 999;

  BinIndex() = default;
  /// Throws DomainError when `v` is outside [0, 999].
  explicit BinIndex(int v);

  int value() const noexcept { return value_; }
  friend bool operator==(BinIndex, BinIndex) = default;
  friend auto operator<=>(BinIndex, BinIndex) = default;

 private:
  int value_ = 0;
};

enum class BinUnit { meters, m_per_s, m_per_s2, radians };

std::string_view to_string(BinUnit u);

/// Uniform discretization of [lo, hi) into n half-open bins; the top bin is closed.
struct BinSpec {
  double lo = -50.0;
  double hi = 50.0;
  int n = 1000;
  BinUnit unit = BinUnit::meters;

  double width() const { return (hi - lo) / n; }
  /// Throws ConfigError unless lo < hi, n >= 1 and n <= 1000.
  void validate() const;

  static BinSpec spatial() { return {}; }
  static BinSpec velocity() { return {-50.0, 50.0, 1000, BinUnit::m_per_s}; }
  static BinSpec acceleration() { return {-50.0, 50.0, 1000, BinUnit::m_per_s2}; }
  static BinSpec yaw() { return {-M_PI, M_PI, 1000, BinUnit::radians}; }
};

/// Out-of-range values clamp into the terminal bins. Non-finite input throws DomainError.
BinIndex encode_bin(double v, const BinSpec& spec = BinSpec::spatial());

/// Center of bin `b`. Throws DomainError when `b` is not a bin of `spec`.
double decode_bin(BinIndex b, const BinSpec& spec = BinSpec::spatial());

using BinPair = std::pair<BinIndex, BinIndex>;

BinPair encode_point(const BevPoint& p, const BinSpec& spec = BinSpec::spatial());
BevPoint decode_point(const BinPair& bins, const BinSpec& spec = BinSpec::spatial());

}  // namespace atlasbench
