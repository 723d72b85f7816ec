#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace promptpack {

struct NumericColumn {
  std::string name;
  std::vector<double> values;  // entries under a set mask bit are ignored
  std::vector<bool> missing;   // empty, or same length as values

  bool is_missing(std::size_t i) const { return !missing.empty() && missing[i]; }
  std::size_t present_count() const;
};

struct UniformQuantParams {
  double min = 0.0;
  double max = 0.0;
  int bits = 8;

  std::uint32_t levels() const noexcept { return std::uint32_t{1} << bits; }
  // (max - min) / (L - 1); 0 for a constant column.
  double max_error() const noexcept;
};

struct KMeansQuantParams {
  std::vector<double> centroids;  // strictly increasing
  std::uint64_t seed = 0;
};

struct QuantizedColumn {
  std::string name;
  std::vector<std::uint32_t> codes;  // 0 where missing
  std::vector<bool> missing;
  std::variant<UniformQuantParams, KMeansQuantParams> params;

  bool is_uniform() const noexcept { return std::holds_alternative<UniformQuantParams>(params); }

  // Sidecar JSON: {type: "uniform", min, max, bits} or {type: "kmeans", centroids, seed}.
  std::string params_json() const;
};

// Parses a params sidecar produced by QuantizedColumn::params_json.
std::variant<UniformQuantParams, KMeansQuantParams> parse_quant_params(std::string_view json);

inline constexpr int kMaxBits = 16;

// q = round((x - min) / (max - min) * (L - 1)), round half away from zero.
// A constant column encodes to all zeros. Throws Error{EmptyColumn} when no
// value is present, Error{InvalidArgument} for bits outside [1, 16] or
// non-finite values.
QuantizedColumn quantize_uniform(const NumericColumn& column, int bits);

// x = min + q / (L - 1) * (max - min). Missing rows come back missing (value 0).
NumericColumn dequantize_uniform(const QuantizedColumn& column);

// Smallest b <= 16 with (max - min) / (2^b - 1) <= tolerance. Throws
// Error{ToleranceUnreachable} when even 16 bits are too coarse,
// Error{InvalidArgument} for tolerance <= 0.
int plan_bits_for_tolerance(const NumericColumn& column, double tolerance);

inline constexpr std::size_t kMaxLloydIterations = 300;

struct LloydResult {
  std::vector<double> centroids;            // as refined, in input order
  std::vector<std::uint32_t> assignments;   // per value
  std::vector<double> sse_trace;            // SSE after each assignment step
  std::size_t iterations = 0;
};

// Lloyd's algorithm in one dimension from the given initial centroids.
// Nearest centroid with ties to the lower index; an emptied cluster keeps its
// previous centroid. Stops when assignments repeat or after max_iterations.
LloydResult lloyd_1d(std::span<const double> values, std::vector<double> centroids,
                     std::size_t max_iterations = kMaxLloydIterations);

// Seeded k-means++ initialisation over values (distinct picks only).
std::vector<double> kmeans_pp_init_1d(std::span<const double> values, std::size_t k, std::uint64_t seed);

// Sum of squared distances of values to their assigned centroid.
double sse_1d(std::span<const double> values, std::span<const double> centroids,
              std::span<const std::uint32_t> assignments);

// 1-D k-means (k-means++ seeding, Lloyd refinement). Centroids are sorted and
// de-duplicated, so fewer than k may remain; codes index them. Throws
// Error{InvalidK} unless 1 <= k <= number of distinct present values.
QuantizedColumn quantize_kmeans(const NumericColumn& column, std::size_t k, std::uint64_t seed);

// x = centroid[code].
NumericColumn dequantize_kmeans(const QuantizedColumn& column);

// Dispatches on the params held by column.
NumericColumn dequantize(const QuantizedColumn& column);

}  // namespace promptpack
