#include "promptpack/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "promptpack/bundled_data.hpp"
#include "promptpack/errors.hpp"

namespace promptpack {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

enum class ChunkClass { Content, FunctionOnly, PunctuationOnly };

struct Chunk {
  std::size_t begin;
  std::size_t end;
  ChunkClass cls;
};

}  // namespace

StopwordSet parse_stopwords(std::string_view text) {
  StopwordSet words;
  for (const auto& line : split_corpus_lines(text)) {
    std::string_view w = line;
    const auto first = w.find_first_not_of(" \t");
    const auto last = w.find_last_not_of(" \t\r");
    w = w.substr(first, last - first + 1);
    if (w.empty() || w.front() == '#') continue;
    words.insert(lower_ascii(w));
  }
  return words;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = parse_stopwords(bundled::stopwords());
  return words;
}

RuleBasedChunker::RuleBasedChunker() : stopwords_(default_stopwords()) {}

RuleBasedChunker::RuleBasedChunker(StopwordSet stopwords) : stopwords_(std::move(stopwords)) {}

bool RuleBasedChunker::is_function_word(std::string_view word) const {
  return stopwords_.contains(lower_ascii(word));
}

std::vector<Phrase> RuleBasedChunker::group(const TokenStream& stream) const {
  // Raw chunks: cut after every sentence punctuation token.
  std::vector<Chunk> chunks;
  std::size_t start = stream.size();
  bool has_content = false;
  bool has_lexical = false;
  auto close = [&](std::size_t end) {
    if (start == stream.size()) return;
    const ChunkClass cls = has_content ? ChunkClass::Content
                           : has_lexical ? ChunkClass::FunctionOnly
                                         : ChunkClass::PunctuationOnly;
    chunks.push_back({start, end, cls});
    start = stream.size();
    has_content = has_lexical = false;
  };
  std::size_t last_non_ws = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Token& t = stream[i];
    if (t.is_whitespace()) continue;
    if (start == stream.size()) start = i;
    last_non_ws = i;
    if (t.is_lexical()) {
      has_lexical = true;
      if (!is_function_word(stream.surface(i))) has_content = true;
    }
    if (t.kind == TokenKind::Punctuation && is_sentence_punctuation(stream.surface(i))) close(i + 1);
  }
  close(last_non_ws + 1);

  // Fold chunks without content into neighbours.
  std::vector<Chunk> merged;
  bool carry = false;  // a function-word chunk waiting for the next chunk
  std::size_t carry_begin = 0;
  for (const Chunk& c : chunks) {
    if (c.cls == ChunkClass::PunctuationOnly && !merged.empty() && !carry) {
      merged.back().end = c.end;
      continue;
    }
    if (c.cls != ChunkClass::Content) {
      if (!carry) carry_begin = c.begin;
      carry = true;
      continue;
    }
    merged.push_back({carry ? carry_begin : c.begin, c.end, ChunkClass::Content});
    carry = false;
  }
  if (carry) {
    if (merged.empty()) {
      merged.push_back({carry_begin, chunks.back().end, ChunkClass::FunctionOnly});
    } else {
      merged.back().end = chunks.back().end;
    }
  }

  std::vector<Phrase> phrases;
  phrases.reserve(merged.size());
  for (const Chunk& c : merged) {
    Phrase p{c.begin, c.end, 0, 0.0};
    for (std::size_t i = c.begin; i < c.end; ++i) {
      if (!stream[i].is_whitespace()) ++p.token_count;
    }
    phrases.push_back(p);
  }
  return phrases;
}

std::vector<Phrase> group_phrases(const TokenStream& stream) {
  static const RuleBasedChunker chunker;
  return chunker.group(stream);
}

Budget Budget::ratio(double value) {
  if (!(value > 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "budget ratio must be in (0, 1], got " + std::to_string(value));
  }
  return Budget(Mode::Ratio, value, 0);
}

Budget Budget::max_tokens(std::size_t value) {
  if (value < 1) throw Error(ErrorCode::InvalidConfig, "budget maxTokens must be >= 1");
  return Budget(Mode::MaxTokens, 1.0, value);
}

std::size_t Budget::limit(std::size_t original_tokens) const noexcept {
  if (mode_ == Mode::MaxTokens) return max_tokens_;
  // The small slack keeps e.g. 0.3 * 10 = 3.0000000000000004 from rounding up to 4.
  const double raw = ratio_ * static_cast<double>(original_tokens);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

std::vector<Phrase> score_phrases(std::span<const Phrase> phrases, std::span<const ScoredToken> scored) {
  std::unordered_map<std::size_t, double> by_token;
  by_token.reserve(scored.size());
  for (const auto& s : scored) by_token.emplace(s.token_index, s.s_combined);

  std::vector<Phrase> out(phrases.begin(), phrases.end());
  for (Phrase& p : out) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = p.begin; i < p.end; ++i) {
      const auto it = by_token.find(i);
      if (it == by_token.end()) continue;
      sum += it->second;
      ++n;
    }
    p.score = n == 0 ? 0.0 : sum / static_cast<double>(n);
  }
  return out;
}

std::vector<std::size_t> select_phrases(std::span<const Phrase> phrases, std::size_t limit) {
  std::vector<std::size_t> order(phrases.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return phrases[a].score > phrases[b].score; });

  std::vector<std::size_t> chosen;
  std::size_t used = 0;
  for (std::size_t idx : order) {
    if (used + phrases[idx].token_count <= limit) {
      chosen.push_back(idx);
      used += phrases[idx].token_count;
    }
  }
  if (chosen.empty() && !order.empty()) chosen.push_back(order.front());
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

PrunedPrompt prune(const TokenStream& stream, std::span<const ScoredToken> scored,
                   std::span<const Phrase> phrases, const Budget& budget) {
  if (phrases.empty()) throw Error(ErrorCode::EmptyInput, "prune: no phrases to select from");

  const std::vector<Phrase> ranked = score_phrases(phrases, scored);
  PrunedPrompt out;
  for (const Phrase& p : ranked) out.original_tokens += p.token_count;
  out.kept_phrase_ids = select_phrases(ranked, budget.limit(out.original_tokens));

  const std::string_view src = stream.source();
  auto offset_of = [&](std::size_t token) { return token < stream.size() ? stream[token].span.begin : src.size(); };

  out.text.append(src.substr(0, offset_of(ranked.front().begin)));
  for (std::size_t k = 0; k < out.kept_phrase_ids.size(); ++k) {
    const std::size_t id = out.kept_phrase_ids[k];
    const Phrase& p = ranked[id];
    if (k > 0) {
      const std::size_t prev = out.kept_phrase_ids[k - 1];
      if (prev + 1 == id) {
        const std::size_t gap_begin = stream[ranked[prev].end - 1].span.end;
        out.text.append(src.substr(gap_begin, offset_of(p.begin) - gap_begin));
      } else {
        out.text.push_back(' ');
      }
    }
    const std::size_t begin = stream[p.begin].span.begin;
    const std::size_t end = stream[p.end - 1].span.end;
    out.text.append(src.substr(begin, end - begin));
    out.kept_phrases.push_back(p);
    out.kept_tokens += p.token_count;
  }
  if (out.kept_phrase_ids.back() + 1 == ranked.size()) {
    const std::size_t tail = stream[ranked.back().end - 1].span.end;
    out.text.append(src.substr(tail));
  }
  return out;
}

}  // namespace promptpack
