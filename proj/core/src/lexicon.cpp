#include "promptpack/lexicon.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "promptpack/errors.hpp"

namespace promptpack {

std::string_view to_string(TokenKind kind) noexcept {
  switch (kind) {
    case TokenKind::Word: return "word";
    case TokenKind::Number: return "number";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Whitespace: return "whitespace";
  }
  return "unknown";
}

bool is_word_char(unsigned char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '\'' || c >= 0x80;
}

bool is_space_char(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_sentence_punctuation(std::string_view surface) noexcept {
  return surface.size() == 1 && (surface[0] == '.' || surface[0] == '!' || surface[0] == '?' ||
                                 surface[0] == ';' || surface[0] == ':');
}

namespace {

bool is_digit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }

std::size_t word_run_end(std::string_view s, std::size_t pos) noexcept {
  while (pos < s.size() && is_word_char(static_cast<unsigned char>(s[pos]))) ++pos;
  return pos;
}

bool all_digits(std::string_view s) noexcept {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return is_digit(c); });
}

}  // namespace

std::size_t TokenStream::countable_size() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      tokens_.begin(), tokens_.end(), [](const Token& t) { return !t.is_whitespace(); }));
}

TokenStream tokenize(std::string source) {
  std::vector<Token> tokens;
  const std::string_view s = source;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto c = static_cast<unsigned char>(s[pos]);
    if (is_space_char(c)) {
      std::size_t end = pos + 1;
      while (end < s.size() && is_space_char(static_cast<unsigned char>(s[end]))) ++end;
      tokens.push_back({{pos, end}, TokenKind::Whitespace});
      pos = end;
    } else if (is_word_char(c)) {
      std::size_t end = word_run_end(s, pos);
      TokenKind kind = TokenKind::Word;
      if (all_digits(s.substr(pos, end - pos))) {
        kind = TokenKind::Number;
        if (end + 1 < s.size() && s[end] == '.' && is_digit(static_cast<unsigned char>(s[end + 1]))) {
          const std::size_t frac_end = word_run_end(s, end + 1);
          if (all_digits(s.substr(end + 1, frac_end - end - 1))) end = frac_end;
        }
      }
      tokens.push_back({{pos, end}, kind});
      pos = end;
    } else {
      tokens.push_back({{pos, pos + 1}, TokenKind::Punctuation});
      ++pos;
    }
  }
  return TokenStream(std::move(source), std::move(tokens));
}

std::size_t count_tokens(std::string_view text) {
  return tokenize(std::string(text)).countable_size();
}

FrequencyModel::FrequencyModel(Counts counts, std::uint64_t total)
    : counts_(std::move(counts)), total_(total) {
  std::uint64_t sum = 0;
  for (const auto& [token, n] : counts_) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "frequency model: zero count for '" + token + "'");
    sum += n;
  }
  if (sum != total_) {
    throw Error(ErrorCode::InvalidArgument, "frequency model: total " + std::to_string(total_) +
                                                " does not equal the sum of counts " + std::to_string(sum));
  }
}

std::uint64_t FrequencyModel::count(std::string_view token) const noexcept {
  const auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

double FrequencyModel::smoothed_probability(std::string_view token) const noexcept {
  const double numerator = static_cast<double>(count(token)) + 1.0;
  const double denominator = static_cast<double>(total_) + static_cast<double>(vocab_size()) + 1.0;
  return numerator / denominator;
}

std::string FrequencyModel::to_json() const {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [token, n] : counts_) counts[token] = n;
  nlohmann::json j = {{"counts", std::move(counts)}, {"total", total_}, {"vocabSize", vocab_size()}};
  return j.dump();
}

FrequencyModel FrequencyModel::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("frequency model: ") + e.what());
  }
  if (!j.is_object() || !j.contains("counts") || !j.contains("total") || !j["counts"].is_object()) {
    throw Error(ErrorCode::ParseError, "frequency model: expected {counts, total, vocabSize}");
  }
  Counts counts;
  for (const auto& [token, n] : j["counts"].items()) {
    if (!n.is_number_unsigned()) throw Error(ErrorCode::ParseError, "frequency model: count must be a non-negative integer");
    counts.emplace(token, n.get<std::uint64_t>());
  }
  FrequencyModel model(std::move(counts), j["total"].get<std::uint64_t>());
  if (j.contains("vocabSize") && j["vocabSize"].get<std::size_t>() != model.vocab_size()) {
    throw Error(ErrorCode::ParseError, "frequency model: vocabSize does not match the number of keys");
  }
  return model;
}

FrequencyModel build_frequency_model(std::span<const std::string> corpus) {
  FrequencyModel::Counts counts;
  std::uint64_t total = 0;
  for (const auto& doc : corpus) {
    const TokenStream stream = tokenize(doc);
    for (std::size_t i = 0; i < stream.size(); ++i) {
      if (stream[i].is_whitespace()) continue;
      const std::string_view surface = stream.surface(i);
      auto it = counts.find(surface);
      if (it == counts.end()) it = counts.emplace(std::string(surface), 0).first;
      ++it->second;
      ++total;
    }
  }
  if (total == 0) throw Error(ErrorCode::EmptyCorpus, "corpus contains no countable tokens");
  return FrequencyModel(std::move(counts), total);
}

double self_information(double probability) {
  if (!(probability > 0.0 && probability <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "probability must be in (0, 1]");
  }
  const double bits = -std::log2(probability);
  return bits == 0.0 ? 0.0 : bits;
}

double static_self_information(const FrequencyModel& model, std::string_view token) {
  return self_information(model.smoothed_probability(token));
}

std::vector<std::string> split_corpus_lines(std::string_view text) {
  std::vector<std::string> docs;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t\r\v\f") != std::string_view::npos) docs.emplace_back(line);
    pos = nl + 1;
  }
  return docs;
}

}  // namespace promptpack
