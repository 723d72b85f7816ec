#include "promptpack/fidelity.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "promptpack/errors.hpp"

namespace promptpack {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine: dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double percentile_linear(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "percentile of an empty list");
  std::sort(values.begin(), values.end());
  const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::string SimilarityReport::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& p : pairs) items.push_back({{"id", p.id}, {"cos", p.cosine}});
  return nlohmann::json{{"mean", mean}, {"p5", p5}, {"pairs", std::move(items)}}.dump();
}

SimilarityReport similarity_report(std::span<const TextPair> pairs, const EmbeddingProvider& provider) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "similarity report: no pairs");
  SimilarityReport report;
  std::vector<double> values;
  values.reserve(pairs.size());
  double sum = 0.0;
  for (const TextPair& pair : pairs) {
    const Vector a = provider.embed(pair.original);
    const Vector b = provider.embed(pair.compressed);
    const double c = cosine(a, b);
    report.pairs.push_back({pair.id, c});
    values.push_back(c);
    sum += c;
  }
  report.mean = sum / static_cast<double>(values.size());
  report.p5 = percentile_linear(std::move(values), 5.0);
  return report;
}

}  // namespace promptpack
