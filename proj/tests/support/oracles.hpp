#pragma once

// Reference implementations for tests. Deliberately naive: each follows the
// textbook definition directly and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

inline double combine(double s_stat, double s_dyn) {
  if (s_stat == 0.0) return s_dyn;
  const double delta = std::fabs(s_dyn - s_stat) / s_stat;
  return delta <= 0.1 ? (s_stat + s_dyn) / 2.0 : s_dyn;
}

// Best total score of any subset of items whose sizes sum to <= limit.
inline double best_subset_score(const std::vector<double>& scores, const std::vector<std::size_t>& sizes,
                                std::size_t limit) {
  const std::size_t n = scores.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::size_t total = 0;
    double score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        total += sizes[i];
        score += scores[i];
      }
    }
    if (total <= limit) best = std::max(best, score);
  }
  return best;
}

struct Partition1d {
  double sse = std::numeric_limits<double>::infinity();
  std::vector<double> centroids;  // sorted
};

// Exhaustive search over all k^n labelings, keeping those that use every label.
inline Partition1d best_partition_1d(const std::vector<double>& xs, std::size_t k) {
  const std::size_t n = xs.size();
  Partition1d best;
  std::vector<std::size_t> label(n, 0);
  while (true) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[label[i]] += xs[i];
      ++cnt[label[i]];
    }
    if (std::all_of(cnt.begin(), cnt.end(), [](std::size_t c) { return c > 0; })) {
      std::vector<double> mu(k);
      for (std::size_t c = 0; c < k; ++c) mu[c] = sum[c] / static_cast<double>(cnt[c]);
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) sse += (xs[i] - mu[label[i]]) * (xs[i] - mu[label[i]]);
      if (sse < best.sse) {
        best.sse = sse;
        std::sort(mu.begin(), mu.end());
        best.centroids = mu;
      }
    }
    std::size_t pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Mean silhouette straight from the definition.
inline double silhouette(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& labels) {
  const std::size_t n = pts.size();
  const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[labels[j]] += distance(pts[i], pts[j]);
      ++cnt[labels[j]];
    }
    if (cnt[labels[i]] == 0) continue;  // singleton scores 0
    const double a = sum[labels[i]] / static_cast<double>(cnt[labels[i]]);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != labels[i] && cnt[c] > 0) b = std::min(b, sum[c] / static_cast<double>(cnt[c]));
    }
    const double m = std::max(a, b);
    total += m == 0.0 ? 0.0 : (b - a) / m;
  }
  return total / static_cast<double>(n);
}

// Random text mixing words, numbers, punctuation, odd whitespace, placeholder-
// shaped tokens and multibyte UTF-8.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> words = {
      "net", "income", "per", "share", "the", "of", "and", "revenue", "A1", "B1", "Q3", "AA1", "Z9",
      "4.2", "2023", "don't", "café", "naïve", "x", "y", "z", "growth", "margin", "A", "1"};
  static const std::vector<std::string> seps = {" ", " ", " ", " ", "  ", "\n", "\t", ", ", ". ", "; ",
                                                "!", "-", "(", ")", "\r\n", "%", ""};
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  const std::size_t target = len_dist(rng);
  // Small vocabularies per text so n-grams repeat.
  std::vector<std::string> vocab;
  const std::size_t vsize = 2 + rng() % 8;
  for (std::size_t i = 0; i < vsize; ++i) vocab.push_back(words[rng() % words.size()]);
  std::string out;
  while (out.size() < target) {
    out += vocab[rng() % vocab.size()];
    out += (rng() % 4 == 0) ? seps[rng() % seps.size()] : std::string(" ");
  }
  out.resize(target);  // may cut a multibyte sequence; the library must still round-trip bytes
  return out;
}

}  // namespace oracle
