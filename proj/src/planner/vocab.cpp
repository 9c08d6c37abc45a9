#include "atlasbench/planner/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "atlasbench/errors.hpp"
#include "atlasbench/qa_codec.hpp"
#include "atlasbench/question_pool.hpp"
#include "atlasbench/scene.hpp"

namespace atlasbench::planner {

namespace {

const std::vector<std::string>& fixed_tokens() {
  static const std::vector<std::string> tokens = [] {
    std::vector<std::string> t{"<pad>", "<bos>", "<eos>", "<ans>", "<unk>", "VEL", "ACC", "YAW", "HIST",
                               "WP",    "CAT",   "LANE",  "[",     "]",     ","};
    for (int b = 0; b < Vocab::kBinCount; ++b) t.push_back(std::to_string(b));
    for (auto name : category_names()) t.emplace_back(name);
    return t;
  }();
  return tokens;
}

}  // namespace

Vocab::Vocab() {
  for (const auto& t : fixed_tokens()) add(t);
}

void Vocab::add(std::string token) {
  if (index_.contains(token)) return;
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(std::span<const std::string> questions) {
  std::set<std::string> words;
  for (const auto& q : questions) {
    for (auto& w : lex_question(q)) {
      if (w != kQuerySlot) words.insert(std::move(w));
    }
  }
  Vocab v;
  for (const auto& w : words) v.add(w);
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  const auto& fixed = fixed_tokens();
  if (tokens.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), tokens.begin())) {
    throw DataError("vocabulary does not start with the fixed token layout");
  }
  Vocab v;
  for (std::size_t i = fixed.size(); i < tokens.size(); ++i) {
    if (v.index_.contains(tokens[i])) throw DataError("duplicate vocabulary token '" + tokens[i] + "'");
    v.add(std::move(tokens[i]));
  }
  return v;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw RangeError("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[id];
}

int Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode_answer(std::string_view text) const {
  std::vector<int> out;
  for (const auto& l : lex_answer(text)) {
    switch (l.kind) {
      case LexKind::word: out.push_back(id(l.text)); break;
      case LexKind::integer: {
        const bool small = l.text.size() <= 3;
        out.push_back(small ? bin_id(std::stoi(std::string(l.text))) : kUnk);
        break;
      }
      case LexKind::open: out.push_back(kOpen); break;
      case LexKind::close: out.push_back(kClose); break;
      case LexKind::comma: out.push_back(kComma); break;
      case LexKind::invalid: out.push_back(kUnk); break;
      case LexKind::end: break;
    }
  }
  return out;
}

std::string Vocab::decode_answer(std::span<const int> ids) const {
  std::string out;
  int prev = -1;
  for (int id : ids) {
    const bool glued = id == kClose || id == kComma || prev == kOpen || prev == kComma;
    if (!out.empty() && !glued) out += ' ';
    out += token(id);
    prev = id;
  }
  return out;
}

std::vector<std::string> lex_question(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = text[i];
    if (std::isspace(c)) {
      ++i;
    } else if (text.substr(i).starts_with(kQuerySlot)) {
      out.emplace_back(kQuerySlot);
      i += kQuerySlot.size();
    } else if (std::isalnum(c)) {
      const std::size_t start = i;
      while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
      out.emplace_back(text.substr(start, i - start));
    } else {
      out.emplace_back(1, static_cast<char>(c));
      ++i;
    }
  }
  return out;
}

}  // namespace atlasbench::planner
