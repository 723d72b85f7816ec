#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace promptpack {

enum class TokenKind { Word, Number, Punctuation, Whitespace };

std::string_view to_string(TokenKind kind) noexcept;

// Half-open byte range [begin, end) into the source text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  Span span;
  TokenKind kind = TokenKind::Word;

  bool is_whitespace() const noexcept { return kind == TokenKind::Whitespace; }
  // Word or number: the tokens that carry lexical content.
  bool is_lexical() const noexcept { return kind == TokenKind::Word || kind == TokenKind::Number; }
};

// Lossless token view of a text. Tokens cover the source contiguously, so
// concatenating every surface in order gives back the source byte for byte.
class TokenStream {
 public:
  TokenStream() = default;
  TokenStream(std::string source, std::vector<Token> tokens)
      : source_(std::move(source)), tokens_(std::move(tokens)) {}

  const std::string& source() const noexcept { return source_; }
  std::span<const Token> tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  std::string_view surface(std::size_t i) const {
    const Span s = tokens_[i].span;
    return std::string_view(source_).substr(s.begin, s.size());
  }

  // Number of non-whitespace tokens. This is the unit every budget and
  // compression ratio in the library is expressed in.
  std::size_t countable_size() const noexcept;

 private:
  std::string source_;
  std::vector<Token> tokens_;
};

// Letters, digits, apostrophes and every byte >= 0x80 (so UTF-8 sequences are
// never split) are word characters.
bool is_word_char(unsigned char c) noexcept;
bool is_space_char(unsigned char c) noexcept;
// . ! ? ; :
bool is_sentence_punctuation(std::string_view surface) noexcept;

// Rule-based, total tokenizer:
//  - a maximal run of word characters is a word token; if the run is all
//    digits it is a number token, extended over one interior decimal point
//    when the point is followed by an all-digit run ("4.2" but not "4.2x");
//  - a maximal run of whitespace is one whitespace token;
//  - any other byte is a single-character punctuation token.
TokenStream tokenize(std::string source);

// Count of non-whitespace tokens in text, i.e. tokenize(text).countable_size().
std::size_t count_tokens(std::string_view text);

// Unigram counts over non-whitespace tokens. Case-sensitive. Immutable once
// built; safe to share between threads.
class FrequencyModel {
 public:
  using Counts = std::map<std::string, std::uint64_t, std::less<>>;

  FrequencyModel() = default;
  // Throws Error{InvalidArgument} when total != sum(counts) or a count is 0.
  FrequencyModel(Counts counts, std::uint64_t total);

  const Counts& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t vocab_size() const noexcept { return counts_.size(); }
  std::uint64_t count(std::string_view token) const noexcept;

  // Laplace-smoothed unigram probability (count + 1) / (N + V + 1). Always in
  // (0, 1) once the model holds at least one token.
  double smoothed_probability(std::string_view token) const noexcept;

  // JSON object {counts, total, vocabSize}.
  std::string to_json() const;
  static FrequencyModel from_json(std::string_view json);

  friend bool operator==(const FrequencyModel&, const FrequencyModel&) = default;

 private:
  Counts counts_;
  std::uint64_t total_ = 0;
};

// Throws Error{EmptyCorpus} when the corpus contains no countable token.
FrequencyModel build_frequency_model(std::span<const std::string> corpus);

// -log2(p). p must be in (0, 1]; returns +0.0 for p == 1.
double self_information(double probability);

// -log2 of the smoothed probability of token under model.
double static_self_information(const FrequencyModel& model, std::string_view token);

// Splits a corpus file into documents: one document per non-empty line.
std::vector<std::string> split_corpus_lines(std::string_view text);

}  // namespace promptpack
