#include "svg.hpp"

#include <cstdio>
#include <fstream>

#include "atlasbench/errors.hpp"
#include "atlasbench/geometry.hpp"
#include "atlasbench/scene_sim.hpp"

namespace atlasbench::cli {

namespace {

constexpr const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Ego frame (x right, y forward) to pixels; 8 px per meter, ego near the bottom center.
struct BevCanvas {
  static constexpr double kScale = 8.0;
  static constexpr double kWidth = 480.0;
  static constexpr double kHeight = 560.0;

  std::string body;

  static std::string px(const BevPoint& p) {
    return num(kWidth / 2 + p.x * kScale) + "," + num(kHeight - 120.0 - p.y * kScale);
  }
  void polygon(std::span<const BevPoint> pts, const std::string& style) {
    body += "  <polygon points=\"";
    for (const auto& p : pts) body += px(p) + " ";
    body += "\" " + style + "/>\n";
  }
  void polyline(std::span<const BevPoint> pts, const std::string& style) {
    body += "  <polyline fill=\"none\" points=\"";
    for (const auto& p : pts) body += px(p) + " ";
    body += "\" " + style + "/>\n";
  }
  std::string finish(const std::string& title) const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\">\n  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body + "  <text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"13\">" +
           title + "</text>\n</svg>\n";
  }
};

}  // namespace

std::string bev_svg(const Scene& scene, int t0, const Trajectory& predicted, const EgoFootprint& footprint) {
  if (t0 < 0 || t0 >= static_cast<int>(scene.frames.size())) {
    throw DataError("scene '" + scene.id + "' has no frame " + std::to_string(t0));
  }
  const Frame& f = scene.frames[t0];
  const Pose pose = f.ego.pose();
  BevCanvas c;
  for (const auto& lane : f.lanes) {
    std::vector<BevPoint> pts;
    for (const auto& p : lane.points) pts.push_back(to_body_frame(p, pose));
    c.polyline(pts, "stroke=\"#bbbbbb\" stroke-width=\"2\" stroke-dasharray=\"6 4\"");
  }
  for (const auto& a : f.agents) {
    const OrientedRect r{to_body_frame(a.center, pose), a.length, a.width, heading_to_body(a.heading, pose)};
    const auto corners = r.corners();
    c.polygon(corners, "fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"1\"");
  }
  const OrientedRect ego{{0.0, 0.0}, footprint.length, footprint.width, 0.0};
  const auto ego_corners = ego.corners();
  c.polygon(ego_corners, "fill=\"#444444\"");

  const auto gt = ground_truth_plan(scene, t0);
  std::vector<BevPoint> gt_line{{0.0, 0.0}}, pred_line{{0.0, 0.0}};
  gt_line.insert(gt_line.end(), gt.begin(), gt.end());
  pred_line.insert(pred_line.end(), predicted.begin(), predicted.end());
  c.polyline(gt_line, "stroke=\"#2ca02c\" stroke-width=\"3\"");
  c.polyline(pred_line, "stroke=\"#d62728\" stroke-width=\"2\"");
  return c.finish(scene.id + " frame " + std::to_string(t0) + "  green: ground truth  red: predicted");
}

std::string pr_svg(double threshold, std::span<const NamedCurve> curves) {
  const double w = 420, h = 420, m = 50;
  auto px = [&](double recall, double precision) {
    return num(m + recall * (w - 2 * m)) + "," + num(h - m - precision * (h - 2 * m));
  };
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\">\n";
  s += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "  <polyline fill=\"none\" stroke=\"black\" points=\"" + px(0, 1) + " " + px(0, 0) + " " + px(1, 0) + "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    s += "  <text x=\"" + num(m + v * (w - 2 * m) - 8) + "\" y=\"" + num(h - m + 16) +
         "\" font-family=\"monospace\" font-size=\"11\">" + num(v) + "</text>\n";
    s += "  <text x=\"8\" y=\"" + num(h - m - v * (h - 2 * m) + 4) + "\" font-family=\"monospace\" font-size=\"11\">" +
         num(v) + "</text>\n";
  }
  s += "  <text x=\"" + num(w / 2 - 20) + "\" y=\"" + num(h - 10) + "\" font-family=\"monospace\" font-size=\"12\">recall</text>\n";
  s += "  <text x=\"8\" y=\"" + num(m - 20) + "\" font-family=\"monospace\" font-size=\"12\">precision, match radius " +
       num(threshold) + " m</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    s += "  <polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (const auto& p : curves[i].points) s += px(p.recall, p.precision) + " ";
    s += "\"/>\n";
    s += "  <text x=\"" + num(w - m - 90) + "\" y=\"" + num(m + 14.0 * static_cast<double>(i)) + "\" fill=\"" + color +
         "\" font-family=\"monospace\" font-size=\"11\">" + curves[i].name + "</text>\n";
  }
  return s + "</svg>\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace atlasbench::cli
