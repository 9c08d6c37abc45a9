#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atlasbench/metrics.hpp"
#include "atlasbench/scene.hpp"

namespace atlasbench::cli {

/// Bird's-eye view of one planning sample in the ego frame at `t0`: agents, lanes, ego
/// footprint, ground-truth plan (green) and predicted plan (red).
std::string bev_svg(const Scene& scene, int t0, const Trajectory& predicted, const EgoFootprint& footprint);

struct NamedCurve {
  std::string name;
  std::vector<PrPoint> points;
};

/// Precision (y) against recall (x), one polyline per curve.
std::string pr_svg(double threshold, std::span<const NamedCurve> curves);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace atlasbench::cli
