#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <string>

#include "promptpack/embedding.hpp"
#include "promptpack/scoring.hpp"

namespace promptpack {

// An HTTP endpoint such as "http://scorer.local:9000/v1/prob".
struct RemoteEndpoint {
  std::string url;
  std::string auth_token;  // sent as "Authorization: Bearer <token>" when non-empty
  std::chrono::milliseconds timeout{30'000};
};

struct ParsedUrl {
  std::string scheme_host_port;  // "http://host:port"
  std::string path;              // "/v1/prob", "/" when absent
};

// Only plain http URLs are accepted. Throws Error{InvalidConfig} otherwise.
ParsedUrl parse_url(const std::string& url);

// Wire format: POST {"context": [string], "token": string} -> {"p": number in (0, 1]}.
// No retries: any transport error, non-2xx status or malformed body raises
// ProviderFailure immediately.
class RemoteProbabilityProvider final : public ProbabilityProvider {
 public:
  explicit RemoteProbabilityProvider(RemoteEndpoint endpoint);

  double probability(std::span<const std::string_view> context, std::string_view token) const override;
  bool concurrency_safe() const noexcept override { return true; }
  std::string name() const override { return "remote:" + endpoint_.url; }

 private:
  RemoteEndpoint endpoint_;
  ParsedUrl parsed_;
};

// Wire format: POST {"text": string} -> {"embedding": [number]}.
// dimension 0 means "take it from the first response"; every later response
// must have the same length.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit RemoteEmbeddingProvider(RemoteEndpoint endpoint, std::size_t dimension = 0);

  Vector embed(std::string_view text) const override;
  std::size_t dimension() const noexcept override { return dimension_.load(); }
  std::string name() const override { return "remote:" + endpoint_.url; }

 private:
  RemoteEndpoint endpoint_;
  ParsedUrl parsed_;
  mutable std::atomic<std::size_t> dimension_;
};

// True when something answers HTTP at the endpoint's host within timeout
// (any status code counts).
bool probe_endpoint(const std::string& url, std::chrono::milliseconds timeout);

}  // namespace promptpack
