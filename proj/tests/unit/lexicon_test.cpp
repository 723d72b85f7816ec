#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/lexicon.hpp"

using namespace promptpack;

namespace {

std::vector<std::string> surfaces(const TokenStream& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.emplace_back(s.surface(i));
  return out;
}

}  // namespace

TEST(Tokenize, EmptyInputGivesEmptyStream) {
  EXPECT_TRUE(tokenize("").empty());
}

TEST(Tokenize, WordsNumbersAndPunctuation) {
  const TokenStream s = tokenize("net income rose 4.2%");
  EXPECT_EQ(surfaces(s), (std::vector<std::string>{"net", " ", "income", " ", "rose", " ", "4.2", "%"}));
  const std::vector<TokenKind> kinds = {TokenKind::Word, TokenKind::Whitespace, TokenKind::Word,
                                        TokenKind::Whitespace, TokenKind::Word, TokenKind::Whitespace,
                                        TokenKind::Number, TokenKind::Punctuation};
  ASSERT_EQ(s.size(), kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) EXPECT_EQ(s[i].kind, kinds[i]) << i;
}

TEST(Tokenize, WhitespaceRunsCollapseAndPunctuationIsSingleChar) {
  const TokenStream s = tokenize("a \t\n b!!");
  EXPECT_EQ(surfaces(s), (std::vector<std::string>{"a", " \t\n ", "b", "!", "!"}));
}

TEST(Tokenize, ApostropheStaysInWord) {
  EXPECT_EQ(surfaces(tokenize("don't stop")), (std::vector<std::string>{"don't", " ", "stop"}));
}

TEST(Tokenize, TrailingDotIsNotPartOfNumber) {
  const TokenStream s = tokenize("rose 4. Then");
  EXPECT_EQ(surfaces(s)[2], "4");
  EXPECT_EQ(s[2].kind, TokenKind::Number);
  EXPECT_EQ(surfaces(s)[3], ".");
}

TEST(Tokenize, RoundTripOnRandomBytes) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 2000; ++iter) {
    std::string text(rng() % 200, '\0');
    for (char& c : text) c = static_cast<char>(rng() % 256);
    const TokenStream s = tokenize(text);
    std::string joined;
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      ASSERT_EQ(s[i].span.begin, prev_end);
      ASSERT_LT(s[i].span.begin, s[i].span.end);
      prev_end = s[i].span.end;
      joined += s.surface(i);
    }
    ASSERT_EQ(joined, text);
  }
}

TEST(FrequencyModel, HandCount) {
  const auto m = build_frequency_model(std::vector<std::string>{"a a b"});
  EXPECT_EQ(m.count("a"), 2u);
  EXPECT_EQ(m.count("b"), 1u);
  EXPECT_EQ(m.total(), 3u);
  EXPECT_EQ(m.vocab_size(), 2u);
}

TEST(FrequencyModel, Singleton) {
  const auto m = build_frequency_model(std::vector<std::string>{"x"});
  EXPECT_EQ(m.count("x"), 1u);
  EXPECT_EQ(m.total(), 1u);
}

TEST(FrequencyModel, EmptyCorpusThrows) {
  try {
    build_frequency_model(std::vector<std::string>{"   ", ""});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCorpus);
  }
}

TEST(FrequencyModel, AdditivityAndDoubling) {
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 50; ++iter) {
    const std::string a = oracle::random_text(rng, 300) + " seed";
    const std::string b = oracle::random_text(rng, 300) + " seed";
    const auto ma = build_frequency_model(std::vector<std::string>{a});
    const auto mb = build_frequency_model(std::vector<std::string>{b});
    const auto mab = build_frequency_model(std::vector<std::string>{a, b});
    EXPECT_EQ(mab.total(), ma.total() + mb.total());
    for (const auto& [tok, c] : mab.counts()) EXPECT_EQ(c, ma.count(tok) + mb.count(tok));
    const auto maa = build_frequency_model(std::vector<std::string>{a, a});
    for (const auto& [tok, c] : ma.counts()) EXPECT_EQ(maa.count(tok), 2 * c);
  }
}

TEST(FrequencyModel, InvariantsSumAndVocab) {
  const auto m = build_frequency_model(std::vector<std::string>{"The cat, the dog. The end!"});
  std::uint64_t sum = 0;
  for (const auto& [t, c] : m.counts()) sum += c;
  EXPECT_EQ(sum, m.total());
  EXPECT_EQ(m.vocab_size(), m.counts().size());
  EXPECT_EQ(m.count("The"), 2u);  // case-sensitive
  EXPECT_EQ(m.count("the"), 1u);
}

TEST(FrequencyModel, JsonRoundTrip) {
  const auto m = build_frequency_model(std::vector<std::string>{"a a b c, d"});
  EXPECT_EQ(FrequencyModel::from_json(m.to_json()), m);
}

TEST(StaticSelfInformation, ThreeBitsForCountOneTokenIn8Of7Distinct) {
  // counts: a:2, b..g:1 -> N = 8, V = 7; p(b) = 2/16
  const auto m = build_frequency_model(std::vector<std::string>{"a a b c d e f g"});
  ASSERT_EQ(m.total(), 8u);
  ASSERT_EQ(m.vocab_size(), 7u);
  EXPECT_NEAR(static_self_information(m, "b"), 3.0, 1e-12);
}

TEST(StaticSelfInformation, ProbabilityEndpoints) {
  EXPECT_DOUBLE_EQ(self_information(1.0), 0.0);
  EXPECT_DOUBLE_EQ(self_information(0.5), 1.0);
}

TEST(StaticSelfInformation, MonotoneInCountAndFinite) {
  const auto m = build_frequency_model(std::vector<std::string>{"a a a a b b b c c d"});
  const double sa = static_self_information(m, "a");
  const double sb = static_self_information(m, "b");
  const double sc = static_self_information(m, "c");
  const double sd = static_self_information(m, "d");
  const double unseen = static_self_information(m, "zzz");
  EXPECT_LE(sa, sb);
  EXPECT_LE(sb, sc);
  EXPECT_LE(sc, sd);
  EXPECT_LE(sd, unseen);
  EXPECT_TRUE(std::isfinite(unseen));
  EXPECT_GT(sa, 0.0);
}

TEST(CountTokens, ExcludesWhitespace) {
  EXPECT_EQ(count_tokens("net income rose 4.2%"), 5u);
  EXPECT_EQ(count_tokens("   "), 0u);
}
