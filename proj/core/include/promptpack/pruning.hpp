#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "promptpack/lexicon.hpp"
#include "promptpack/scoring.hpp"

namespace promptpack {

// Contiguous run of stream tokens [begin, end). token_count excludes whitespace.
struct Phrase {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t token_count = 0;
  double score = 0.0;
};

class PhraseGrouper {
 public:
  virtual ~PhraseGrouper() = default;
  // Phrases must partition the non-whitespace tokens of stream, in order.
  virtual std::vector<Phrase> group(const TokenStream& stream) const = 0;
};

using StopwordSet = std::set<std::string, std::less<>>;

// One word per line; blank lines and lines starting with '#' are ignored.
// Entries are lower-cased.
StopwordSet parse_stopwords(std::string_view text);
const StopwordSet& default_stopwords();

// Clause chunker. A phrase ends at (and includes) sentence punctuation
// (. ! ? ; :). Chunks left without a content word are folded into a
// neighbour: function-word-only chunks attach to the following content
// token, punctuation-only chunks to the preceding phrase.
class RuleBasedChunker final : public PhraseGrouper {
 public:
  RuleBasedChunker();
  explicit RuleBasedChunker(StopwordSet stopwords);

  std::vector<Phrase> group(const TokenStream& stream) const override;
  bool is_function_word(std::string_view word) const;

 private:
  StopwordSet stopwords_;
};

// RuleBasedChunker with the bundled stopword list.
std::vector<Phrase> group_phrases(const TokenStream& stream);

class Budget {
 public:
  enum class Mode { Ratio, MaxTokens };

  // ratio in (0, 1]; throws Error{InvalidConfig} otherwise.
  static Budget ratio(double value);
  // max_tokens >= 1; throws Error{InvalidConfig} otherwise.
  static Budget max_tokens(std::size_t value);

  Mode mode() const noexcept { return mode_; }
  double ratio_value() const noexcept { return ratio_; }
  std::size_t max_tokens_value() const noexcept { return max_tokens_; }
  bool is_identity() const noexcept { return mode_ == Mode::Ratio && ratio_ == 1.0; }

  // Token limit for a prompt of original_tokens tokens: ceil(ratio * original)
  // in ratio mode, the fixed cap otherwise.
  std::size_t limit(std::size_t original_tokens) const noexcept;

 private:
  Budget(Mode mode, double ratio, std::size_t max_tokens)
      : mode_(mode), ratio_(ratio), max_tokens_(max_tokens) {}

  Mode mode_;
  double ratio_;
  std::size_t max_tokens_;
};

struct PrunedPrompt {
  std::vector<Phrase> kept_phrases;  // original order, scores filled in
  std::vector<std::size_t> kept_phrase_ids;  // indices into the input phrase list
  std::string text;
  std::size_t original_tokens = 0;
  std::size_t kept_tokens = 0;
};

// Phrase score: arithmetic mean of its members' combined scores.
std::vector<Phrase> score_phrases(std::span<const Phrase> phrases, std::span<const ScoredToken> scored);

// Indices (into phrases) chosen by the greedy rule: phrases are visited by
// descending score, earlier phrase first on ties; each one is taken when it
// still fits under the limit. If none fits, the single best phrase is kept.
// Returned in ascending order.
std::vector<std::size_t> select_phrases(std::span<const Phrase> phrases, std::size_t limit);

// Scores phrases, selects under budget and reassembles the text. Leading
// whitespace is kept, whitespace inside and between adjacent kept phrases is
// copied verbatim, a single space joins kept phrases separated by dropped
// ones, and trailing whitespace survives only with the final phrase. With
// every phrase kept the output is byte-equal to the source.
// Throws Error{EmptyInput} when phrases is empty.
PrunedPrompt prune(const TokenStream& stream, std::span<const ScoredToken> scored,
                   std::span<const Phrase> phrases, const Budget& budget);

}  // namespace promptpack
