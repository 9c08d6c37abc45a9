#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atlasbench::planner {

/// Token <-> id map. Fixed layout: special and answer-grammar tokens, then the 1000 bin
/// tokens, then category names, then question word pieces in sorted order.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kAns = 3;
  static constexpr int kUnk = 4;
  static constexpr int kOpen = 12;
  static constexpr int kClose = 13;
  static constexpr int kComma = 14;
  static constexpr int kBinBase = 15;
  static constexpr int kBinCount = 1000;

  /// Only the fixed tokens.
  Vocab();
  /// Fixed tokens plus every word piece of `questions`.
  static Vocab build(std::span<const std::string> questions);
  /// Restores a vocabulary from its token list; throws DataError if the fixed layout differs.
  static Vocab from_tokens(std::vector<std::string> tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(int id) const;
  /// kUnk for unknown text.
  int id(std::string_view token) const;

  static bool is_bin(int id) { return id >= kBinBase && id < kBinBase + kBinCount; }
  static int bin_id(int bin) { return kBinBase + bin; }

  /// Answer text to ids (no BOS/EOS). Integers above 999 and unknown words become kUnk.
  std::vector<int> encode_answer(std::string_view text) const;
  /// Ids back to answer text with the canonical spacing of the answer grammar.
  std::string decode_answer(std::span<const int> ids) const;

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Splits a question into word pieces: alphanumeric runs, single punctuation characters,
/// and whole `<query>` slots.
std::vector<std::string> lex_question(std::string_view text);

}  // namespace atlasbench::planner
