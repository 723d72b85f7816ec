#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "promptpack/lexicon.hpp"

namespace promptpack {

struct NGramConfig {
  std::size_t n = 2;        // words per n-gram (G)
  std::size_t top_k = 100;  // dictionary size (T)
  std::size_t min_freq = 2;

  // Throws Error{InvalidConfig} unless n >= 2, top_k >= 1, min_freq >= 1.
  void validate() const;
};

// n-gram text -> occurrence statistics. An n-gram is n word/number tokens
// separated by single spaces, so its text (words joined by ' ') is exactly
// the substring it was read from. Windows never span any other separator,
// which also keeps them inside sentences.
class FrequencyHistogram {
 public:
  struct Stats {
    std::size_t count = 0;
    std::size_t first_offset = 0;  // byte offset of the first occurrence
  };

  explicit FrequencyHistogram(std::size_t n = 2) : n_(n) {}

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return counts_.empty(); }
  std::size_t count(std::string_view ngram) const;
  const std::map<std::string, Stats, std::less<>>& entries() const noexcept { return counts_; }

  void add(std::string_view ngram, std::size_t offset);

 private:
  std::size_t n_;
  std::map<std::string, Stats, std::less<>> counts_;
};

// Counts every window of n consecutive eligible tokens, overlaps included.
FrequencyHistogram extract_ngrams(const TokenStream& stream, std::size_t n);

// Placeholder candidates in generation order: A1..Z1, AA1..ZZ1, AAA1, ...
std::string placeholder_candidate(std::size_t index);

// Bijective placeholder <-> n-gram table bound to one source text.
class AbbrevDictionary {
 public:
  struct Entry {
    std::string placeholder;
    std::string ngram;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  AbbrevDictionary() = default;
  // Validates injectivity and placeholder shape; throws Error{ParseError}.
  AbbrevDictionary(NGramConfig config, std::string source_hash, std::vector<Entry> entries);

  const NGramConfig& config() const noexcept { return config_; }
  const std::string& source_hash() const noexcept { return source_hash_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  // nullptr when absent.
  const std::string* ngram_for(std::string_view placeholder) const;

  // Sidecar JSON: {n, topK, minFreq, sourceHash, entries: [{ph, ngram}]}.
  std::string to_json() const;
  static AbbrevDictionary from_json(std::string_view json);

  friend bool operator==(const AbbrevDictionary& a, const AbbrevDictionary& b) {
    return a.source_hash_ == b.source_hash_ && a.entries_ == b.entries_ && a.config_.n == b.config_.n &&
           a.config_.top_k == b.config_.top_k && a.config_.min_freq == b.config_.min_freq;
  }

 private:
  void index();

  NGramConfig config_;
  std::string source_hash_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_placeholder_;
};

// Placeholder-shaped: one or more 'A'-'Z' followed by a single digit.
bool is_placeholder_shaped(std::string_view token) noexcept;

// Top-k n-grams with count >= min_freq, ordered by (count desc, first
// occurrence asc). Placeholders come from placeholder_candidate(), skipping
// any candidate found anywhere in source; an n-gram not strictly longer than
// its placeholder is skipped without consuming the placeholder.
AbbrevDictionary build_dictionary(const FrequencyHistogram& hist, const NGramConfig& config,
                                  std::string_view source);

struct AbbreviatedText {
  std::string text;
  AbbrevDictionary dictionary;
};

// Single left-to-right pass. At each word/number token the first dictionary
// entry (in dictionary order) whose n-gram starts there and ends on a token
// boundary is substituted and the scan resumes after it. Everything else is
// copied byte for byte. Throws Error{DictionaryMismatch} if the dictionary was
// built against different content.
AbbreviatedText abbreviate(std::string_view source, const AbbrevDictionary& dictionary);

// Replaces each placeholder token by its n-gram and checks the result against
// the dictionary's source hash. On mismatch throws Error{UnknownPlaceholder}
// when the text holds a placeholder-shaped token absent from the dictionary,
// Error{DictionaryMismatch} otherwise.
std::string expand(const AbbreviatedText& abbreviated);

// extract_ngrams + build_dictionary + abbreviate.
AbbreviatedText abbreviate_text(std::string_view source, const NGramConfig& config);

}  // namespace promptpack
