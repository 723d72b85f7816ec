#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "promptpack/lexicon.hpp"

namespace promptpack {

// Source of contextual token probabilities P(token | context).
//
// Implementations must return a value in (0, 1] and be deterministic for
// identical inputs within one session. Failures are reported by throwing
// ProviderFailure (any other exception is wrapped into one by the callers in
// this header).
class ProbabilityProvider {
 public:
  virtual ~ProbabilityProvider() = default;

  virtual double probability(std::span<const std::string_view> context, std::string_view token) const = 0;

  // True when probability() may be called from several threads at once.
  virtual bool concurrency_safe() const noexcept { return false; }

  virtual std::string name() const = 0;
};

// Offline stand-in for a language-model scorer: add-one smoothed bigrams
// with unigram backoff, built from a corpus. Deterministic and thread-safe.
//
//   P(t | ..., w) = (c(w, t) + 1) / (c(w, *) + V + 1)   if c(w, *) > 0
//   P(t | ...)    = (c(t) + 1) / (N + V + 1)             otherwise
//
// where V is the unigram vocabulary size and N the unigram total.
class FallbackBigramProvider final : public ProbabilityProvider {
 public:
  explicit FallbackBigramProvider(std::span<const std::string> corpus);

  double probability(std::span<const std::string_view> context, std::string_view token) const override;
  bool concurrency_safe() const noexcept override { return true; }
  std::string name() const override { return "fallback-bigram"; }

  const FrequencyModel& unigrams() const noexcept { return unigrams_; }
  std::uint64_t bigram_count(std::string_view left, std::string_view right) const;
  std::uint64_t left_count(std::string_view left) const;

 private:
  FrequencyModel unigrams_;
  std::unordered_map<std::string, std::uint64_t> bigrams_;
  std::unordered_map<std::string, std::uint64_t> left_counts_;
};

// -log2 P(token | context) as reported by provider. Throws ProviderFailure if
// the provider fails or answers outside (0, 1].
double dynamic_self_information(const ProbabilityProvider& provider,
                                std::span<const std::string_view> context, std::string_view token);

inline constexpr double kDefaultCombineThreshold = 0.1;

// Static/dynamic combination. With delta = |s_dyn - s_stat| / s_stat:
// the arithmetic mean when delta <= threshold, s_dyn otherwise. s_stat == 0
// is treated as delta = infinity (so the result is s_dyn, which is 0 when
// both are 0). Both inputs must be finite and >= 0.
double combine_scores(double s_stat, double s_dyn, double threshold = kDefaultCombineThreshold);

// Relative difference used by combine_scores; +inf when s_stat == 0 and s_dyn > 0, 0 when both are 0.
double relative_difference(double s_stat, double s_dyn) noexcept;

struct ScoredToken {
  std::size_t token_index = 0;  // into the TokenStream
  double s_stat = 0.0;
  double s_dyn = 0.0;
  double s_combined = 0.0;
};

struct ScoringOptions {
  double threshold = kDefaultCombineThreshold;
  // Worker threads for provider calls; honoured only for concurrency-safe providers.
  std::size_t parallelism = 1;
};

// One ScoredToken per non-whitespace token, in stream order. The context for
// each token is every preceding non-whitespace token of the stream.
std::vector<ScoredToken> score_stream(const TokenStream& stream, const FrequencyModel& model,
                                      const ProbabilityProvider& provider,
                                      const ScoringOptions& options = {});

}  // namespace promptpack
