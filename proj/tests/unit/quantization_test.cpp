#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "../support/oracles.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/quantization.hpp"

using namespace promptpack;

namespace {

NumericColumn col(std::vector<double> v) { return NumericColumn{"c", std::move(v), {}}; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Uniform, EndpointsAndMidpoint) {
  const auto q = quantize_uniform(col({0, 10, 5}), 3);
  EXPECT_EQ(q.codes, (std::vector<std::uint32_t>{0, 7, 4}));
  const auto& p = std::get<UniformQuantParams>(q.params);
  EXPECT_EQ(p.levels(), 8u);
  EXPECT_DOUBLE_EQ(p.max_error(), 10.0 / 7.0);
  const auto r = dequantize_uniform(q);
  EXPECT_DOUBLE_EQ(r.values[0], 0.0);
  EXPECT_DOUBLE_EQ(r.values[1], 10.0);
}

TEST(Uniform, RoundHalfAwayFromZero) {
  // (x - min) / range * 7 == 3.5 exactly for x = 5 on [0, 10]
  EXPECT_EQ(quantize_uniform(col({0, 10, 5}), 3).codes[2], 4u);
  EXPECT_EQ(quantize_uniform(col({-10, 0, -5}), 3).codes[2], 4u);
  // 0.5 of a step on a 1-bit scale
  EXPECT_EQ(quantize_uniform(col({0, 2, 1}), 1).codes[2], 1u);
}

TEST(Uniform, ConstantColumn) {
  for (int b : {1, 8, 16}) {
    const auto q = quantize_uniform(col({7, 7, 7}), b);
    EXPECT_EQ(q.codes, (std::vector<std::uint32_t>{0, 0, 0}));
    const auto r = dequantize_uniform(q);
    EXPECT_EQ(r.values, (std::vector<double>{7, 7, 7}));
    EXPECT_EQ(std::get<UniformQuantParams>(q.params).max_error(), 0.0);
  }
}

TEST(Uniform, Errors) {
  EXPECT_EQ(code_of([] { quantize_uniform(col({}), 8); }), ErrorCode::EmptyColumn);
  NumericColumn all_missing{"m", {1, 2}, {true, true}};
  EXPECT_EQ(code_of([&] { quantize_uniform(all_missing, 8); }), ErrorCode::EmptyColumn);
  EXPECT_EQ(code_of([] { quantize_uniform(col({1, 2}), 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { quantize_uniform(col({1, 2}), 17); }), ErrorCode::InvalidArgument);
}

TEST(Uniform, ErrorBoundAllBitWidths) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> scale(-1e6, 1e6);
  for (int iter = 0; iter < 200; ++iter) {
    const double a = scale(rng);
    const double b = scale(rng);
    std::uniform_real_distribution<double> u(std::min(a, b), std::max(a, b));
    std::vector<double> v(1 + rng() % 100);
    for (double& x : v) x = u(rng);
    const auto c = col(v);
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    for (int bits = 1; bits <= 16; ++bits) {
      const auto q = quantize_uniform(c, bits);
      const auto r = dequantize_uniform(q);
      const double eps = (hi - lo) / (std::ldexp(1.0, bits) - 1.0);
      for (std::size_t i = 0; i < v.size(); ++i) {
        ASSERT_LT(q.codes[i], 1u << bits);
        ASSERT_LE(std::fabs(r.values[i] - v[i]), eps * (1 + 1e-12));
      }
    }
  }
}

TEST(Uniform, MissingValuesPassThrough) {
  NumericColumn c{"m", {1, 999, 3}, {false, true, false}};
  const auto q = quantize_uniform(c, 4);
  EXPECT_EQ(q.missing, c.missing);
  EXPECT_EQ(q.codes[1], 0u);
  const auto r = dequantize_uniform(q);
  EXPECT_TRUE(r.is_missing(1));
  EXPECT_DOUBLE_EQ(std::get<UniformQuantParams>(q.params).max, 3.0);
}

TEST(PlanBits, HandCases) {
  EXPECT_EQ(plan_bits_for_tolerance(col({0, 10}), 10.0), 1);
  EXPECT_EQ(plan_bits_for_tolerance(col({4, 4}), 0.001), 1);
  EXPECT_EQ(plan_bits_for_tolerance(col({0, 10}), 0.01), 10);
  EXPECT_EQ(code_of([] { plan_bits_for_tolerance(col({0, 1e9}), 1e-9); }), ErrorCode::ToleranceUnreachable);
}

TEST(KMeans, HandCaseTwoClusters) {
  const auto q = quantize_kmeans(col({0, 1, 10, 11}), 2, 42);
  const auto& p = std::get<KMeansQuantParams>(q.params);
  ASSERT_EQ(p.centroids.size(), 2u);
  EXPECT_DOUBLE_EQ(p.centroids[0], 0.5);
  EXPECT_DOUBLE_EQ(p.centroids[1], 10.5);
  EXPECT_EQ(q.codes, (std::vector<std::uint32_t>{0, 0, 1, 1}));
  const auto best = oracle::best_partition_1d({0, 1, 10, 11}, 2);
  EXPECT_EQ(best.centroids, p.centroids);
}

TEST(KMeans, ExactWhenKEqualsDistinctCount) {
  const std::vector<double> v = {3, 1, 3, 2, 1, 2};
  const auto q = quantize_kmeans(col(v), 3, 1);
  const auto r = dequantize_kmeans(q);
  EXPECT_EQ(r.values, v);
}

TEST(KMeans, InvalidK) {
  EXPECT_EQ(code_of([] { quantize_kmeans(col({1, 1, 2}), 3, 0); }), ErrorCode::InvalidK);
  EXPECT_EQ(code_of([] { quantize_kmeans(col({1, 2}), 0, 0); }), ErrorCode::InvalidK);
}

TEST(KMeans, CentroidsStrictlyIncreasingAndCodesNearest) {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> nd(0.0, 5.0);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> v(5 + rng() % 60);
    for (double& x : v) x = std::round(nd(rng) * 10) / 10;
    const std::size_t distinct = std::set<double>(v.begin(), v.end()).size();
    const std::size_t k = 1 + rng() % std::min<std::size_t>(distinct, 8);
    const auto q = quantize_kmeans(col(v), k, iter);
    const auto& c = std::get<KMeansQuantParams>(q.params).centroids;
    for (std::size_t i = 1; i < c.size(); ++i) ASSERT_LT(c[i - 1], c[i]);
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) {
        ASSERT_LE(std::fabs(v[i] - c[q.codes[i]]), std::fabs(v[i] - c[j]) + 1e-12);
      }
    }
  }
}

TEST(Lloyd, SseNeverIncreases) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 100);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> v(10 + rng() % 100);
    for (double& x : v) x = u(rng);
    const std::size_t k = 1 + rng() % 6;
    const auto res = lloyd_1d(v, kmeans_pp_init_1d(v, k, iter));
    for (std::size_t i = 1; i < res.sse_trace.size(); ++i) {
      ASSERT_LE(res.sse_trace[i], res.sse_trace[i - 1] + 1e-9);
    }
    ASSERT_LE(res.iterations, kMaxLloydIterations);
  }
}

TEST(Lloyd, OptimalFromBestPartitionAndBeatsUniformLevels) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<double> v(3 + rng() % 10);
    for (double& x : v) x = u(rng);
    const std::size_t k = 1 + rng() % 3;
    const auto best = oracle::best_partition_1d(v, k);
    const auto from_best = lloyd_1d(v, best.centroids);
    ASSERT_NEAR(sse_1d(v, from_best.centroids, from_best.assignments), best.sse, 1e-9);

    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    std::vector<double> levels(k);
    for (std::size_t j = 0; j < k; ++j) levels[j] = k == 1 ? (lo + hi) / 2 : lo + (hi - lo) * j / (k - 1);
    std::vector<std::uint32_t> uniform_assign(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::size_t bj = 0;
      for (std::size_t j = 1; j < k; ++j) {
        if (std::fabs(v[i] - levels[j]) < std::fabs(v[i] - levels[bj])) bj = j;
      }
      uniform_assign[i] = static_cast<std::uint32_t>(bj);
    }
    const auto refined = lloyd_1d(v, levels);
    ASSERT_LE(sse_1d(v, refined.centroids, refined.assignments), sse_1d(v, levels, uniform_assign) + 1e-9);
  }
}

TEST(KMeans, Deterministic) {
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back(std::sin(i) * 50);
  const auto a = quantize_kmeans(col(v), 7, 99);
  const auto b = quantize_kmeans(col(v), 7, 99);
  EXPECT_EQ(a.codes, b.codes);
  EXPECT_EQ(std::get<KMeansQuantParams>(a.params).centroids, std::get<KMeansQuantParams>(b.params).centroids);
}

TEST(QuantParams, JsonRoundTrip) {
  const auto u = quantize_uniform(col({1.5, 2.25, 9}), 5);
  const auto pu = std::get<UniformQuantParams>(parse_quant_params(u.params_json()));
  EXPECT_EQ(pu.min, 1.5);
  EXPECT_EQ(pu.max, 9.0);
  EXPECT_EQ(pu.bits, 5);
  const auto k = quantize_kmeans(col({0.1, 0.2, 5, 5.1}), 2, 3);
  const auto pk = std::get<KMeansQuantParams>(parse_quant_params(k.params_json()));
  EXPECT_EQ(pk.centroids, std::get<KMeansQuantParams>(k.params).centroids);
}
