#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "atlasbench/bev_space.hpp"
#include "atlasbench/scene.hpp"

namespace atlasbench {

// ---------------------------------------------------------------------------
// Chain-of-thought specification
// ---------------------------------------------------------------------------

/// V: velocity, A: acceleration, Y: yaw, T: historical trajectory, P: planned waypoints.
enum class ChainElement { V, A, Y, T, P };

/// Ordered answer fields. P is mandatory and no element repeats.
class ChainSpec {
 public:
  /// Defaults to V-A-P.
  ChainSpec();
  /// Throws ConfigError on duplicates or a missing P.
  explicit ChainSpec(std::vector<ChainElement> order);

  /// Parses "V-A-P" style strings (also accepts "VAP"). Throws ConfigError.
  static ChainSpec parse(std::string_view text);
  /// The six orders studied in the chain-of-thought ablation: P, V-P, V-A-P, V-A-Y-P, V-A-T-P, P-V-A.
  static std::array<ChainSpec, 6> ablation_orders();

  const std::vector<ChainElement>& order() const { return order_; }
  bool contains(ChainElement e) const;
  std::string to_string() const;

  friend bool operator==(const ChainSpec&, const ChainSpec&) = default;

 private:
  std::vector<ChainElement> order_;
};

// ---------------------------------------------------------------------------
// Positioned parse errors
// ---------------------------------------------------------------------------

struct ParseError {
  std::size_t offset = 0;  // byte offset into the parsed text
  std::string expected;    // e.g. "VEL", "6 waypoints"
  std::string found;       // offending lexeme, empty at end of input

  std::string message() const;
};

/// Either a parsed value or a positioned error.
template <class T>
class ParseResult {
 public:
  ParseResult(T value) : state_(std::move(value)) {}
  ParseResult(ParseError error) : state_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }
  const T& value() const { return std::get<T>(state_); }
  T& value() { return std::get<T>(state_); }
  const ParseError& error() const { return std::get<ParseError>(state_); }

 private:
  std::variant<T, ParseError> state_;
};

// ---------------------------------------------------------------------------
// Planning answers
// ---------------------------------------------------------------------------

/// Real-valued ego quantities for one planning sample, in the ego frame at prediction time
/// (yaw stays in the world frame).
struct PlanningValues {
  Vec2 velocity;
  Vec2 acceleration;
  double yaw = 0.0;
  std::array<BevPoint, kHistoryLength> history{};
  std::array<BevPoint, kPlanLength> waypoints{};
};

/// Binned planning answer. Optional fields are present iff their element is in the chain.
struct PlanningAnswer {
  std::optional<BinPair> velocity;
  std::optional<BinPair> acceleration;
  std::optional<BinIndex> yaw;
  std::optional<std::array<BinPair, kHistoryLength>> history;
  std::array<BinPair, kPlanLength> waypoints{};

  std::array<BevPoint, kPlanLength> decoded_waypoints() const;
  std::optional<Vec2> decoded_velocity() const;
  std::optional<Vec2> decoded_acceleration() const;
  std::optional<double> decoded_yaw() const;

  friend bool operator==(const PlanningAnswer&, const PlanningAnswer&) = default;
};

/// Ego-frame values of frame `t0` of `scene`. Requires full history and future.
PlanningValues planning_values(const Scene& scene, int t0);

/// Bins every field of `values` that appears in `chain`; out-of-range values clamp.
PlanningAnswer quantize(const PlanningValues& values, const ChainSpec& chain);

/// Renders `VEL [bx,by] ACC [bx,by] ... WP [b,b] x6` in chain order.
std::string render_planning_answer(const PlanningAnswer& answer, const ChainSpec& chain);

std::string encode_planning_answer(const PlanningValues& values, const ChainSpec& chain);

/// Strict and total: never throws on any input.
ParseResult<PlanningAnswer> parse_planning_answer(std::string_view text, const ChainSpec& chain);

// ---------------------------------------------------------------------------
// Detection and lane answers
// ---------------------------------------------------------------------------

struct DetectionItem {
  Category category = Category::car;
  BinPair center;
  friend bool operator==(const DetectionItem&, const DetectionItem&) = default;
};

struct DetectionAnswer {
  std::vector<DetectionItem> objects;
  friend bool operator==(const DetectionAnswer&, const DetectionAnswer&) = default;
};

struct LaneAnswer {
  std::vector<std::array<BinPair, 4>> lanes;
  friend bool operator==(const LaneAnswer&, const LaneAnswer&) = default;
};

/// Agents and lanes of frame `t` in its own ego frame, restricted to the 50 m detection range.
std::vector<std::pair<Category, BevPoint>> detection_targets(const Frame& frame);
std::vector<std::array<BevPoint, 4>> lane_targets(const Frame& frame);

DetectionAnswer quantize_detections(const std::vector<std::pair<Category, BevPoint>>& objects);
LaneAnswer quantize_lanes(const std::vector<std::array<BevPoint, 4>>& lanes);

/// `CAT <name> [bx,by]` repeated; empty for no objects.
std::string render_detection_answer(const DetectionAnswer& answer);
/// `LANE [b,b] [b,b] [b,b] [b,b]` repeated.
std::string render_lane_answer(const LaneAnswer& answer);

std::string encode_detection_answer(const std::vector<std::pair<Category, BevPoint>>& objects);
std::string encode_lane_answer(const std::vector<std::array<BevPoint, 4>>& lanes);

ParseResult<DetectionAnswer> parse_detection_answer(std::string_view text);
ParseResult<LaneAnswer> parse_lane_answer(std::string_view text);

std::vector<std::pair<Category, BevPoint>> decode_detections(const DetectionAnswer& answer);
std::vector<std::array<BevPoint, 4>> decode_lanes(const LaneAnswer& answer);

// ---------------------------------------------------------------------------
// Answer lexer, shared with the planner vocabulary
// ---------------------------------------------------------------------------

enum class LexKind { word, integer, open, close, comma, end, invalid };

struct Lexeme {
  LexKind kind = LexKind::end;
  std::string_view text;
  std::size_t offset = 0;
};

/// Splits answer text into words, integers and punctuation; whitespace separates lexemes.
/// Stops at the first invalid character, which is returned as an `invalid` lexeme.
std::vector<Lexeme> lex_answer(std::string_view text);

}  // namespace atlasbench
