#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "promptpack/embedding.hpp"

namespace promptpack {

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws Error{DimensionMismatch}
// or Error{ZeroVector}.
double cosine(std::span<const double> a, std::span<const double> b);

// Percentile in [0, 100] by linear interpolation between order statistics:
// rank = p / 100 * (n - 1). Throws Error{EmptyInput} for no values.
double percentile_linear(std::vector<double> values, double p);

inline constexpr double kDefaultFidelityWarning = 0.92;

struct SimilarityPair {
  std::string id;
  double cosine = 0.0;
};

struct SimilarityReport {
  std::vector<SimilarityPair> pairs;
  double mean = 0.0;
  double p5 = 0.0;

  bool below(double threshold) const noexcept { return mean < threshold || p5 < threshold; }
  // {mean, p5, pairs: [{id, cos}]}
  std::string to_json() const;
};

struct TextPair {
  std::string id;
  std::string original;
  std::string compressed;
};

// Embeds both sides of every pair and reports per-pair cosine, mean and 5th
// percentile. Throws Error{EmptyInput} for no pairs; provider errors propagate.
SimilarityReport similarity_report(std::span<const TextPair> pairs, const EmbeddingProvider& provider);

}  // namespace promptpack
