#include "promptpack/abbreviation.hpp"

#include <algorithm>
#include <unordered_set>

#include "json.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/hashing.hpp"

namespace promptpack {

void NGramConfig::validate() const {
  if (n < 2) throw Error(ErrorCode::InvalidConfig, "n-gram length must be >= 2");
  if (top_k < 1) throw Error(ErrorCode::InvalidConfig, "dictionary size (topK) must be >= 1");
  if (min_freq < 1) throw Error(ErrorCode::InvalidConfig, "minFreq must be >= 1");
}

std::size_t FrequencyHistogram::count(std::string_view ngram) const {
  const auto it = counts_.find(ngram);
  return it == counts_.end() ? 0 : it->second.count;
}

void FrequencyHistogram::add(std::string_view ngram, std::size_t offset) {
  auto it = counts_.find(ngram);
  if (it == counts_.end()) {
    counts_.emplace(std::string(ngram), Stats{1, offset});
  } else {
    ++it->second.count;
  }
}

FrequencyHistogram extract_ngrams(const TokenStream& stream, std::size_t n) {
  FrequencyHistogram hist(n);
  if (n < 2) return hist;
  const std::string_view src = stream.source();
  // Positions (stream indices) of the lexical tokens in the current run of
  // single-space-separated words.
  std::vector<std::size_t> run;
  auto flush = [&] {
    for (std::size_t k = 0; k + n <= run.size(); ++k) {
      const std::size_t begin = stream[run[k]].span.begin;
      const std::size_t end = stream[run[k + n - 1]].span.end;
      hist.add(src.substr(begin, end - begin), begin);
    }
    run.clear();
  };
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Token& t = stream[i];
    if (t.is_lexical()) {
      const bool continues = !run.empty() && run.back() + 2 == i && stream.surface(i - 1) == " ";
      if (!continues) flush();
      run.push_back(i);
    } else if (!(t.is_whitespace() && stream.surface(i) == " ")) {
      flush();
    }
  }
  flush();
  return hist;
}

std::string placeholder_candidate(std::size_t index) {
  // Bijective base-26: 0 -> A, 25 -> Z, 26 -> AA, ...
  std::string letters;
  std::size_t v = index + 1;
  while (v > 0) {
    --v;
    letters.push_back(static_cast<char>('A' + v % 26));
    v /= 26;
  }
  std::reverse(letters.begin(), letters.end());
  return letters + "1";
}

bool is_placeholder_shaped(std::string_view token) noexcept {
  if (token.size() < 2) return false;
  const char last = token.back();
  if (last < '0' || last > '9') return false;
  return std::all_of(token.begin(), token.end() - 1, [](char c) { return c >= 'A' && c <= 'Z'; });
}

AbbrevDictionary::AbbrevDictionary(NGramConfig config, std::string source_hash, std::vector<Entry> entries)
    : config_(config), source_hash_(std::move(source_hash)), entries_(std::move(entries)) {
  index();
}

void AbbrevDictionary::index() {
  by_placeholder_.clear();
  std::unordered_set<std::string> ngrams;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (!is_placeholder_shaped(e.placeholder)) {
      throw Error(ErrorCode::ParseError, "dictionary: malformed placeholder '" + e.placeholder + "'");
    }
    if (e.ngram.empty()) throw Error(ErrorCode::ParseError, "dictionary: empty n-gram");
    if (!by_placeholder_.emplace(e.placeholder, i).second) {
      throw Error(ErrorCode::ParseError, "dictionary: duplicate placeholder '" + e.placeholder + "'");
    }
    if (!ngrams.insert(e.ngram).second) {
      throw Error(ErrorCode::ParseError, "dictionary: duplicate n-gram '" + e.ngram + "'");
    }
  }
}

const std::string* AbbrevDictionary::ngram_for(std::string_view placeholder) const {
  const auto it = by_placeholder_.find(std::string(placeholder));
  return it == by_placeholder_.end() ? nullptr : &entries_[it->second].ngram;
}

std::string AbbrevDictionary::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : entries_) entries.push_back({{"ph", e.placeholder}, {"ngram", e.ngram}});
  const nlohmann::json j = {{"n", config_.n},
                            {"topK", config_.top_k},
                            {"minFreq", config_.min_freq},
                            {"sourceHash", source_hash_},
                            {"entries", std::move(entries)}};
  return j.dump(2);
}

AbbrevDictionary AbbrevDictionary::from_json(std::string_view json) {
  try {
    const nlohmann::json j = nlohmann::json::parse(json);
    NGramConfig config;
    config.n = j.at("n").get<std::size_t>();
    config.top_k = j.at("topK").get<std::size_t>();
    config.min_freq = j.value("minFreq", std::size_t{2});
    std::vector<Entry> entries;
    for (const auto& e : j.at("entries")) {
      entries.push_back({e.at("ph").get<std::string>(), e.at("ngram").get<std::string>()});
    }
    return AbbrevDictionary(config, j.at("sourceHash").get<std::string>(), std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("dictionary: ") + e.what());
  }
}

AbbrevDictionary build_dictionary(const FrequencyHistogram& hist, const NGramConfig& config,
                                  std::string_view source) {
  config.validate();
  struct Candidate {
    std::string_view ngram;
    FrequencyHistogram::Stats stats;
  };
  std::vector<Candidate> candidates;
  for (const auto& [ngram, stats] : hist.entries()) {
    if (stats.count >= config.min_freq) candidates.push_back({ngram, stats});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.stats.count != b.stats.count) return a.stats.count > b.stats.count;
    if (a.stats.first_offset != b.stats.first_offset) return a.stats.first_offset < b.stats.first_offset;
    return a.ngram < b.ngram;
  });
  if (candidates.size() > config.top_k) candidates.resize(config.top_k);

  std::vector<AbbrevDictionary::Entry> entries;
  std::size_t next = 0;
  std::string placeholder;
  auto advance = [&] {
    do {
      placeholder = placeholder_candidate(next++);
    } while (source.find(placeholder) != std::string_view::npos);
  };
  advance();
  for (const Candidate& c : candidates) {
    if (placeholder.size() >= c.ngram.size()) continue;
    entries.push_back({placeholder, std::string(c.ngram)});
    advance();
  }
  return AbbrevDictionary(config, content_hash(source), std::move(entries));
}

AbbreviatedText abbreviate(std::string_view source, const AbbrevDictionary& dictionary) {
  if (content_hash(source) != dictionary.source_hash()) {
    throw Error(ErrorCode::DictionaryMismatch, "abbreviate: dictionary was built for different content");
  }
  AbbreviatedText out{std::string(), dictionary};
  if (dictionary.empty()) {
    out.text.assign(source);
    return out;
  }
  const TokenStream stream = tokenize(std::string(source));

  // End offset of every token -> index of the following token.
  std::unordered_map<std::size_t, std::size_t> next_after_end;
  next_after_end.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) next_after_end.emplace(stream[i].span.end, i + 1);

  // Entries bucketed by their first word, keeping dictionary order.
  std::unordered_map<std::string_view, std::vector<std::size_t>> by_first_word;
  const auto& entries = dictionary.entries();
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const std::string_view ngram = entries[e].ngram;
    by_first_word[ngram.substr(0, ngram.find(' '))].push_back(e);
  }

  out.text.reserve(source.size());
  std::size_t i = 0;
  while (i < stream.size()) {
    const Token& t = stream[i];
    bool substituted = false;
    if (t.is_lexical()) {
      const auto bucket = by_first_word.find(stream.surface(i));
      if (bucket != by_first_word.end()) {
        for (std::size_t e : bucket->second) {
          const std::string& ngram = entries[e].ngram;
          const std::size_t end = t.span.begin + ngram.size();
          if (source.compare(t.span.begin, ngram.size(), ngram) != 0) continue;
          const auto next = next_after_end.find(end);
          if (next == next_after_end.end()) continue;
          out.text += entries[e].placeholder;
          i = next->second;
          substituted = true;
          break;
        }
      }
    }
    if (!substituted) {
      out.text.append(source.substr(t.span.begin, t.span.size()));
      ++i;
    }
  }
  return out;
}

std::string expand(const AbbreviatedText& abbreviated) {
  const AbbrevDictionary& dict = abbreviated.dictionary;
  const TokenStream stream = tokenize(abbreviated.text);
  std::string out;
  out.reserve(abbreviated.text.size() * 2);
  std::string unknown;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const std::string_view surface = stream.surface(i);
    if (stream[i].kind == TokenKind::Word) {
      if (const std::string* ngram = dict.ngram_for(surface)) {
        out += *ngram;
        continue;
      }
      if (unknown.empty() && is_placeholder_shaped(surface)) unknown = surface;
    }
    out.append(surface);
  }
  if (content_hash(out) != dict.source_hash()) {
    if (!unknown.empty()) {
      throw Error(ErrorCode::UnknownPlaceholder, "expand: placeholder '" + unknown + "' has no dictionary entry");
    }
    throw Error(ErrorCode::DictionaryMismatch, "expand: expanded text does not match the dictionary's source hash");
  }
  return out;
}

AbbreviatedText abbreviate_text(std::string_view source, const NGramConfig& config) {
  config.validate();
  const TokenStream stream = tokenize(std::string(source));
  const FrequencyHistogram hist = extract_ngrams(stream, config.n);
  return abbreviate(source, build_dictionary(hist, config, source));
}

}  // namespace promptpack
