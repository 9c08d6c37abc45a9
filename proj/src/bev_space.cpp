#include "atlasbench/bev_space.hpp"

#include <algorithm>
#include <string>

#include "atlasbench/errors.hpp"

namespace atlasbench {

BinIndex::BinIndex(int v) : value_(v) {
  if (v < 0 || v > kMax) {
    throw DomainError("bin index " + std::to_string(v) + " outside [0, 999]");
  }
}

std::string_view to_string(BinUnit u) {
  switch (u) {
    case BinUnit::meters: return "m";
    case BinUnit::m_per_s: return "m/s";
    case BinUnit::m_per_s2: return "m/s^2";
    case BinUnit::radians: return "rad";
  }
  return "?";
}

void BinSpec::validate() const {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw ConfigError("bin spec requires finite lo < hi");
  }
  if (n < 1 || n > BinIndex::kMax + 1) {
    throw ConfigError("bin spec requires 1 <= n <= 1000, got " + std::to_string(n));
  }
}

BinIndex encode_bin(double v, const BinSpec& spec) {
  if (!std::isfinite(v)) {
    throw DomainError("cannot bin a non-finite value");
  }
  spec.validate();
  if (v <= spec.lo) return BinIndex(0);
  if (v >= spec.hi) return BinIndex(spec.n - 1);
  // Scale before dividing: (v - lo) / w loses the exact decimal edge, e.g. 42.4 / 0.1 < 424.
  const auto k = static_cast<int>(std::floor((v - spec.lo) * spec.n / (spec.hi - spec.lo)));
  return BinIndex(std::clamp(k, 0, spec.n - 1));
}

double decode_bin(BinIndex b, const BinSpec& spec) {
  spec.validate();
  if (b.value() >= spec.n) {
    throw DomainError("bin index " + std::to_string(b.value()) + " outside spec with n=" +
                      std::to_string(spec.n));
  }
  return spec.lo + (b.value() + 0.5) * spec.width();
}

BinPair encode_point(const BevPoint& p, const BinSpec& spec) {
  return {encode_bin(p.x, spec), encode_bin(p.y, spec)};
}

BevPoint decode_point(const BinPair& bins, const BinSpec& spec) {
  return {decode_bin(bins.first, spec), decode_bin(bins.second, spec)};
}

}  // namespace atlasbench
