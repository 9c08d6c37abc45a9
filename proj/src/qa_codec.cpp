#include "atlasbench/qa_codec.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "atlasbench/errors.hpp"
#include "atlasbench/scene_sim.hpp"

namespace atlasbench {

namespace {

constexpr std::string_view kVel = "VEL";
constexpr std::string_view kAcc = "ACC";
constexpr std::string_view kYaw = "YAW";
constexpr std::string_view kHist = "HIST";
constexpr std::string_view kWp = "WP";
constexpr std::string_view kCat = "CAT";
constexpr std::string_view kLane = "LANE";

std::string_view marker(ChainElement e) {
  switch (e) {
    case ChainElement::V: return kVel;
    case ChainElement::A: return kAcc;
    case ChainElement::Y: return kYaw;
    case ChainElement::T: return kHist;
    case ChainElement::P: return kWp;
  }
  return kWp;
}

char letter(ChainElement e) { return "VAYTP"[static_cast<int>(e)]; }

std::string pair_text(const BinPair& p) {
  return "[" + std::to_string(p.first.value()) + "," + std::to_string(p.second.value()) + "]";
}

bool is_word_char(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Cursor {
 public:
  explicit Cursor(std::string_view text) : lexemes_(lex_answer(text)) {}

  const Lexeme& peek() const { return lexemes_[pos_]; }
  bool at_end() const { return peek().kind == LexKind::end; }
  void advance() {
    if (!at_end()) ++pos_;
  }

  ParseError error(std::string expected) const {
    const Lexeme& l = peek();
    return ParseError{l.offset, std::move(expected), std::string(l.text)};
  }

  bool next_is_word(std::string_view w) const { return peek().kind == LexKind::word && peek().text == w; }

  std::optional<ParseError> expect(LexKind kind, std::string_view what) {
    if (peek().kind != kind) return error(std::string(what));
    advance();
    return std::nullopt;
  }

  std::optional<ParseError> expect_word(std::string_view w) {
    if (!next_is_word(w)) return error(std::string(w));
    advance();
    return std::nullopt;
  }

  std::optional<ParseError> bin(BinIndex& out) {
    const Lexeme& l = peek();
    if (l.kind != LexKind::integer || l.text.size() > 3) return error("bin index in [0, 999]");
    int v = 0;
    for (char c : l.text) v = v * 10 + (c - '0');
    out = BinIndex(v);
    advance();
    return std::nullopt;
  }

  std::optional<ParseError> pair(BinPair& out) {
    if (auto e = expect(LexKind::open, "[")) return e;
    if (auto e = bin(out.first)) return e;
    if (auto e = expect(LexKind::comma, ",")) return e;
    if (auto e = bin(out.second)) return e;
    return expect(LexKind::close, "]");
  }

  template <std::size_t N>
  std::optional<ParseError> pairs(std::array<BinPair, N>& out, const std::string& what) {
    std::size_t count = 0;
    while (peek().kind == LexKind::open) {
      if (count == N) return error(what);
      if (auto e = pair(out[count])) return e;
      ++count;
    }
    if (count != N) return error(what);
    return std::nullopt;
  }

 private:
  std::vector<Lexeme> lexemes_;
  std::size_t pos_ = 0;
};

std::string join_names() {
  std::string out;
  for (auto n : category_names()) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

// ----- ChainSpec -------------------------------------------------------------

ChainSpec::ChainSpec() : order_{ChainElement::V, ChainElement::A, ChainElement::P} {}

ChainSpec::ChainSpec(std::vector<ChainElement> order) : order_(std::move(order)) {
  std::set<ChainElement> seen;
  for (auto e : order_) {
    if (!seen.insert(e).second) throw ConfigError("chain repeats element '" + std::string(1, letter(e)) + "'");
  }
  if (!seen.contains(ChainElement::P)) throw ConfigError("chain must contain P");
}

ChainSpec ChainSpec::parse(std::string_view text) {
  std::vector<ChainElement> order;
  for (char c : text) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
      case 'V': order.push_back(ChainElement::V); break;
      case 'A': order.push_back(ChainElement::A); break;
      case 'Y': order.push_back(ChainElement::Y); break;
      case 'T': order.push_back(ChainElement::T); break;
      case 'P': order.push_back(ChainElement::P); break;
      case '-': break;
      default: throw ConfigError("unknown chain element '" + std::string(1, c) + "' in '" + std::string(text) + "'");
    }
  }
  return ChainSpec(std::move(order));
}

std::array<ChainSpec, 6> ChainSpec::ablation_orders() {
  return {parse("P"), parse("V-P"), parse("V-A-P"), parse("V-A-Y-P"), parse("V-A-T-P"), parse("P-V-A")};
}

bool ChainSpec::contains(ChainElement e) const { return std::ranges::find(order_, e) != order_.end(); }

std::string ChainSpec::to_string() const {
  std::string s;
  for (auto e : order_) {
    if (!s.empty()) s += '-';
    s += letter(e);
  }
  return s;
}

// ----- errors ----------------------------------------------------------------

std::string ParseError::message() const {
  return "at byte " + std::to_string(offset) + ": expected " + expected + ", found " +
         (found.empty() ? std::string("end of input") : "'" + found + "'");
}

// ----- lexer -----------------------------------------------------------------

std::vector<Lexeme> lex_answer(std::string_view text) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (c == '[' || c == ']' || c == ',') {
      out.push_back({c == '[' ? LexKind::open : c == ']' ? LexKind::close : LexKind::comma, text.substr(i, 1), i});
      ++i;
    } else if (is_digit(c)) {
      while (i < text.size() && is_digit(text[i])) ++i;
      out.push_back({LexKind::integer, text.substr(start, i - start), start});
    } else if (is_word_char(c)) {
      while (i < text.size() && is_word_char(text[i])) ++i;
      out.push_back({LexKind::word, text.substr(start, i - start), start});
    } else {
      out.push_back({LexKind::invalid, text.substr(i, 1), i});
      out.push_back({LexKind::end, {}, text.size()});
      return out;
    }
  }
  out.push_back({LexKind::end, {}, text.size()});
  return out;
}

// ----- planning --------------------------------------------------------------

std::array<BevPoint, kPlanLength> PlanningAnswer::decoded_waypoints() const {
  std::array<BevPoint, kPlanLength> out;
  for (int k = 0; k < kPlanLength; ++k) out[k] = decode_point(waypoints[k], BinSpec::spatial());
  return out;
}

std::optional<Vec2> PlanningAnswer::decoded_velocity() const {
  if (!velocity) return std::nullopt;
  return decode_point(*velocity, BinSpec::velocity());
}

std::optional<Vec2> PlanningAnswer::decoded_acceleration() const {
  if (!acceleration) return std::nullopt;
  return decode_point(*acceleration, BinSpec::acceleration());
}

std::optional<double> PlanningAnswer::decoded_yaw() const {
  if (!yaw) return std::nullopt;
  return decode_bin(*yaw, BinSpec::yaw());
}

PlanningValues planning_values(const Scene& scene, int t0) {
  PlanningValues v;
  v.waypoints = ground_truth_plan(scene, t0);
  const EgoState& ego = scene.frames[t0].ego;
  if (ego.history.size() != static_cast<std::size_t>(kHistoryLength)) {
    throw RangeError("frame " + std::to_string(t0) + " of scene '" + scene.id + "' lacks a full ego history");
  }
  const Pose pose = ego.pose();
  v.velocity = rotate_to_body(ego.velocity, pose);
  v.acceleration = rotate_to_body(ego.acceleration, pose);
  v.yaw = ego.yaw;
  for (int k = 0; k < kHistoryLength; ++k) v.history[k] = to_body_frame(ego.history[k], pose);
  return v;
}

PlanningAnswer quantize(const PlanningValues& values, const ChainSpec& chain) {
  PlanningAnswer a;
  if (chain.contains(ChainElement::V)) a.velocity = encode_point(values.velocity, BinSpec::velocity());
  if (chain.contains(ChainElement::A)) a.acceleration = encode_point(values.acceleration, BinSpec::acceleration());
  if (chain.contains(ChainElement::Y)) a.yaw = encode_bin(values.yaw, BinSpec::yaw());
  if (chain.contains(ChainElement::T)) {
    std::array<BinPair, kHistoryLength> h;
    for (int k = 0; k < kHistoryLength; ++k) h[k] = encode_point(values.history[k]);
    a.history = h;
  }
  for (int k = 0; k < kPlanLength; ++k) a.waypoints[k] = encode_point(values.waypoints[k]);
  return a;
}

std::string render_planning_answer(const PlanningAnswer& answer, const ChainSpec& chain) {
  std::string out;
  auto field = [&out](std::string_view m) {
    if (!out.empty()) out += ' ';
    out += m;
  };
  for (auto e : chain.order()) {
    field(marker(e));
    switch (e) {
      case ChainElement::V:
        if (!answer.velocity) throw DomainError("chain requests VEL but the answer has no velocity");
        out += ' ' + pair_text(*answer.velocity);
        break;
      case ChainElement::A:
        if (!answer.acceleration) throw DomainError("chain requests ACC but the answer has no acceleration");
        out += ' ' + pair_text(*answer.acceleration);
        break;
      case ChainElement::Y:
        if (!answer.yaw) throw DomainError("chain requests YAW but the answer has no yaw");
        out += " [" + std::to_string(answer.yaw->value()) + "]";
        break;
      case ChainElement::T:
        if (!answer.history) throw DomainError("chain requests HIST but the answer has no history");
        for (const auto& p : *answer.history) out += ' ' + pair_text(p);
        break;
      case ChainElement::P:
        for (const auto& p : answer.waypoints) out += ' ' + pair_text(p);
        break;
    }
  }
  return out;
}

std::string encode_planning_answer(const PlanningValues& values, const ChainSpec& chain) {
  return render_planning_answer(quantize(values, chain), chain);
}

ParseResult<PlanningAnswer> parse_planning_answer(std::string_view text, const ChainSpec& chain) {
  Cursor cur(text);
  PlanningAnswer a;
  for (auto e : chain.order()) {
    if (auto err = cur.expect_word(marker(e))) return *err;
    switch (e) {
      case ChainElement::V: {
        BinPair p;
        if (auto err = cur.pair(p)) return *err;
        a.velocity = p;
        break;
      }
      case ChainElement::A: {
        BinPair p;
        if (auto err = cur.pair(p)) return *err;
        a.acceleration = p;
        break;
      }
      case ChainElement::Y: {
        BinIndex b;
        if (auto err = cur.expect(LexKind::open, "[")) return *err;
        if (auto err = cur.bin(b)) return *err;
        if (auto err = cur.expect(LexKind::close, "]")) return *err;
        a.yaw = b;
        break;
      }
      case ChainElement::T: {
        std::array<BinPair, kHistoryLength> h;
        if (auto err = cur.pairs(h, "3 history waypoints")) return *err;
        a.history = h;
        break;
      }
      case ChainElement::P:
        if (auto err = cur.pairs(a.waypoints, "6 waypoints")) return *err;
        break;
    }
  }
  if (!cur.at_end()) return cur.error("end of answer");
  return a;
}

// ----- detection & lanes -----------------------------------------------------

std::vector<std::pair<Category, BevPoint>> detection_targets(const Frame& frame) {
  std::vector<std::pair<Category, BevPoint>> out;
  const Pose pose = frame.ego.pose();
  for (const auto& a : frame.agents) {
    const BevPoint p = to_body_frame(a.center, pose);
    if (std::abs(p.x) < 50.0 && std::abs(p.y) < 50.0) out.emplace_back(a.category, p);
  }
  return out;
}

std::vector<std::array<BevPoint, 4>> lane_targets(const Frame& frame) {
  std::vector<std::array<BevPoint, 4>> out;
  const Pose pose = frame.ego.pose();
  for (const auto& l : frame.lanes) {
    std::array<BevPoint, 4> pts;
    bool inside = true;
    for (int k = 0; k < 4; ++k) {
      pts[k] = to_body_frame(l.points[k], pose);
      inside = inside && std::abs(pts[k].x) < 50.0 && std::abs(pts[k].y) < 50.0;
    }
    if (inside) out.push_back(pts);
  }
  return out;
}

DetectionAnswer quantize_detections(const std::vector<std::pair<Category, BevPoint>>& objects) {
  DetectionAnswer a;
  for (const auto& [cat, p] : objects) a.objects.push_back({cat, encode_point(p)});
  return a;
}

LaneAnswer quantize_lanes(const std::vector<std::array<BevPoint, 4>>& lanes) {
  LaneAnswer a;
  for (const auto& l : lanes) {
    std::array<BinPair, 4> bins;
    for (int k = 0; k < 4; ++k) bins[k] = encode_point(l[k]);
    a.lanes.push_back(bins);
  }
  return a;
}

std::string render_detection_answer(const DetectionAnswer& answer) {
  std::string out;
  for (const auto& o : answer.objects) {
    if (!out.empty()) out += ' ';
    out += std::string(kCat) + ' ' + std::string(to_string(o.category)) + ' ' + pair_text(o.center);
  }
  return out;
}

std::string render_lane_answer(const LaneAnswer& answer) {
  std::string out;
  for (const auto& l : answer.lanes) {
    if (!out.empty()) out += ' ';
    out += kLane;
    for (const auto& p : l) out += ' ' + pair_text(p);
  }
  return out;
}

std::string encode_detection_answer(const std::vector<std::pair<Category, BevPoint>>& objects) {
  return render_detection_answer(quantize_detections(objects));
}

std::string encode_lane_answer(const std::vector<std::array<BevPoint, 4>>& lanes) {
  return render_lane_answer(quantize_lanes(lanes));
}

ParseResult<DetectionAnswer> parse_detection_answer(std::string_view text) {
  Cursor cur(text);
  DetectionAnswer a;
  while (!cur.at_end()) {
    if (auto err = cur.expect_word(kCat)) return *err;
    const Lexeme name = cur.peek();
    const auto cat = name.kind == LexKind::word ? parse_category(name.text) : std::nullopt;
    if (!cat) return cur.error("category name (one of " + join_names() + ")");
    cur.advance();
    DetectionItem item{*cat, {}};
    if (auto err = cur.pair(item.center)) return *err;
    a.objects.push_back(item);
  }
  return a;
}

ParseResult<LaneAnswer> parse_lane_answer(std::string_view text) {
  Cursor cur(text);
  LaneAnswer a;
  while (!cur.at_end()) {
    if (auto err = cur.expect_word(kLane)) return *err;
    std::array<BinPair, 4> pts;
    if (auto err = cur.pairs(pts, "4 lane points")) return *err;
    a.lanes.push_back(pts);
  }
  return a;
}

std::vector<std::pair<Category, BevPoint>> decode_detections(const DetectionAnswer& answer) {
  std::vector<std::pair<Category, BevPoint>> out;
  for (const auto& o : answer.objects) out.emplace_back(o.category, decode_point(o.center));
  return out;
}

std::vector<std::array<BevPoint, 4>> decode_lanes(const LaneAnswer& answer) {
  std::vector<std::array<BevPoint, 4>> out;
  for (const auto& l : answer.lanes) {
    std::array<BevPoint, 4> pts;
    for (int k = 0; k < 4; ++k) pts[k] = decode_point(l[k]);
    out.push_back(pts);
  }
  return out;
}

}  // namespace atlasbench
