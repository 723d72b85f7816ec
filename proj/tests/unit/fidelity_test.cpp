#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "promptpack/embedding.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/fidelity.hpp"

using namespace promptpack;

TEST(Cosine, HandValues) {
  const std::vector<double> a = {1, 2, 3};
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-15);
  EXPECT_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(std::vector<double>{1, 1, 0}, std::vector<double>{1, 0, 0}), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Cosine, Errors) {
  try {
    cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
  try {
    cosine(std::vector<double>{1}, std::vector<double>{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Cosine, SymmetryScaleInvarianceAndRange) {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_real_distribution<double> pos(0.01, 100);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> a(1 + rng() % 16);
    std::vector<double> b(a.size());
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const double c = cosine(a, b);
    ASSERT_GE(c, -1.0);
    ASSERT_LE(c, 1.0);
    ASSERT_NEAR(c, cosine(b, a), 1e-12);
    const double lambda = pos(rng);
    std::vector<double> la(a);
    for (auto& x : la) x *= lambda;
    ASSERT_NEAR(cosine(la, b), c, 1e-12);
  }
}

TEST(Percentile, LinearInterpolation) {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(0.01 * i);
  EXPECT_NEAR(percentile_linear(v, 5.0), 0.0595, 1e-12);
  EXPECT_EQ(percentile_linear({0.3}, 5.0), 0.3);
}

TEST(SimilarityReport, SinglePairAndIdentity) {
  const HashingEmbedder emb;
  const std::vector<TextPair> one = {{"p", "net income rose", "net income"}};
  const auto r1 = similarity_report(one, emb);
  EXPECT_EQ(r1.mean, r1.p5);
  EXPECT_EQ(r1.pairs.size(), 1u);

  std::vector<TextPair> same;
  for (int i = 0; i < 20; ++i) same.push_back({std::to_string(i), "text number " + std::to_string(i), "text number " + std::to_string(i)});
  const auto r = similarity_report(same, emb);
  EXPECT_NEAR(r.mean, 1.0, 1e-12);
  EXPECT_NEAR(r.p5, 1.0, 1e-12);
}

TEST(SimilarityReport, P5WithinRangeAndJson) {
  const HashingEmbedder emb;
  std::vector<TextPair> pairs = {{"a", "alpha beta gamma", "alpha beta"},
                                 {"b", "delta epsilon", "delta"},
                                 {"c", "one two three four", "one four"}};
  const auto r = similarity_report(pairs, emb);
  double lo = 1.0;
  double hi = -1.0;
  for (const auto& p : r.pairs) {
    lo = std::min(lo, p.cosine);
    hi = std::max(hi, p.cosine);
  }
  EXPECT_GE(r.p5, lo);
  EXPECT_LE(r.p5, hi);
  EXPECT_NE(r.to_json().find("\"p5\""), std::string::npos);
  EXPECT_THROW(similarity_report(std::vector<TextPair>{}, emb), Error);
}
