#include "promptpack/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <limits>

#include "promptpack/errors.hpp"

namespace promptpack {

namespace {

std::string bigram_key(std::string_view left, std::string_view right) {
  std::string key = std::to_string(left.size());
  key += ':';
  key += left;
  key += right;
  return key;
}

}  // namespace

FallbackBigramProvider::FallbackBigramProvider(std::span<const std::string> corpus)
    : unigrams_(build_frequency_model(corpus)) {
  for (const auto& doc : corpus) {
    const TokenStream stream = tokenize(doc);
    std::string_view prev;
    bool have_prev = false;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      if (stream[i].is_whitespace()) continue;
      const std::string_view cur = stream.surface(i);
      if (have_prev) {
        ++bigrams_[bigram_key(prev, cur)];
        ++left_counts_[std::string(prev)];
      }
      prev = cur;
      have_prev = true;
    }
  }
}

std::uint64_t FallbackBigramProvider::bigram_count(std::string_view left, std::string_view right) const {
  const auto it = bigrams_.find(bigram_key(left, right));
  return it == bigrams_.end() ? 0 : it->second;
}

std::uint64_t FallbackBigramProvider::left_count(std::string_view left) const {
  const auto it = left_counts_.find(std::string(left));
  return it == left_counts_.end() ? 0 : it->second;
}

double FallbackBigramProvider::probability(std::span<const std::string_view> context,
                                           std::string_view token) const {
  const double vocab = static_cast<double>(unigrams_.vocab_size());
  if (!context.empty()) {
    const std::uint64_t left = left_count(context.back());
    if (left > 0) {
      return (static_cast<double>(bigram_count(context.back(), token)) + 1.0) /
             (static_cast<double>(left) + vocab + 1.0);
    }
  }
  return unigrams_.smoothed_probability(token);
}

double dynamic_self_information(const ProbabilityProvider& provider,
                                std::span<const std::string_view> context, std::string_view token) {
  double p = 0.0;
  try {
    p = provider.probability(context, token);
  } catch (const ProviderFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderFailure(provider.name() + ": " + e.what());
  }
  if (!(p > 0.0 && p <= 1.0)) {
    throw ProviderFailure(provider.name() + ": probability " + std::to_string(p) + " outside (0, 1]");
  }
  const double bits = -std::log2(p);
  return bits == 0.0 ? 0.0 : bits;
}

double relative_difference(double s_stat, double s_dyn) noexcept {
  if (s_stat == 0.0) return s_dyn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(s_dyn - s_stat) / s_stat;
}

double combine_scores(double s_stat, double s_dyn, double threshold) {
  if (!(s_stat >= 0.0) || !(s_dyn >= 0.0) || !std::isfinite(s_stat) || !std::isfinite(s_dyn)) {
    throw Error(ErrorCode::InvalidArgument, "combine_scores: scores must be finite and >= 0");
  }
  if (s_stat == 0.0) return s_dyn;
  const double delta = std::abs(s_dyn - s_stat) / s_stat;
  return delta <= threshold ? (s_stat + s_dyn) / 2.0 : s_dyn;
}

std::vector<ScoredToken> score_stream(const TokenStream& stream, const FrequencyModel& model,
                                      const ProbabilityProvider& provider, const ScoringOptions& options) {
  std::vector<std::size_t> indices;
  std::vector<std::string_view> surfaces;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (stream[i].is_whitespace()) continue;
    indices.push_back(i);
    surfaces.push_back(stream.surface(i));
  }

  std::vector<ScoredToken> scored(indices.size());
  auto score_one = [&](std::size_t k) {
    const std::span<const std::string_view> context(surfaces.data(), k);
    ScoredToken& out = scored[k];
    out.token_index = indices[k];
    out.s_stat = static_self_information(model, surfaces[k]);
    try {
      out.s_dyn = dynamic_self_information(provider, context, surfaces[k]);
    } catch (const ProviderFailure& e) {
      throw ProviderFailure(std::string(e.what()) + " (token " + std::to_string(indices[k]) + ")",
                            indices[k]);
    }
    out.s_combined = combine_scores(out.s_stat, out.s_dyn, options.threshold);
  };

  const std::size_t workers = std::min(options.parallelism, indices.size());
  if (workers <= 1 || !provider.concurrency_safe()) {
    for (std::size_t k = 0; k < indices.size(); ++k) score_one(k);
    return scored;
  }

  // Strided partition; each worker writes only its own slots so results land
  // in stream order whatever the completion order.
  std::vector<std::future<void>> jobs;
  jobs.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t k = w; k < indices.size(); k += workers) score_one(k);
    }));
  }
  std::exception_ptr first_error;
  for (auto& job : jobs) {
    try {
      job.get();
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return scored;
}

}  // namespace promptpack
