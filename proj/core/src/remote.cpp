#include "promptpack/remote.hpp"

#include <cmath>

#include "httplib.h"
#include "json.hpp"
#include "promptpack/errors.hpp"

namespace promptpack {

namespace {

void configure(httplib::Client& client, const RemoteEndpoint& endpoint) {
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  if (!endpoint.auth_token.empty()) client.set_bearer_token_auth(endpoint.auth_token);
}

nlohmann::json post_json(const RemoteEndpoint& endpoint, const ParsedUrl& url, const nlohmann::json& body,
                         const std::string& who) {
  httplib::Client client(url.scheme_host_port);
  configure(client, endpoint);
  const auto res = client.Post(url.path, body.dump(), "application/json");
  if (!res) {
    throw ProviderFailure(who + ": request failed (" + httplib::to_string(res.error()) + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderFailure(who + ": HTTP status " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw ProviderFailure(who + ": response is not JSON");
  }
}

}  // namespace

ParsedUrl parse_url(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0 || url.size() == kScheme.size()) {
    throw Error(ErrorCode::InvalidConfig, "endpoint must be an http:// URL: '" + url + "'");
  }
  const std::size_t slash = url.find('/', kScheme.size());
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

RemoteProbabilityProvider::RemoteProbabilityProvider(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)), parsed_(parse_url(endpoint_.url)) {}

double RemoteProbabilityProvider::probability(std::span<const std::string_view> context,
                                              std::string_view token) const {
  nlohmann::json ctx = nlohmann::json::array();
  for (auto c : context) ctx.push_back(std::string(c));
  const nlohmann::json body = {{"context", std::move(ctx)}, {"token", std::string(token)}};
  const nlohmann::json reply = post_json(endpoint_, parsed_, body, name());
  if (!reply.is_object() || !reply.contains("p") || !reply["p"].is_number()) {
    throw ProviderFailure(name() + ": response lacks numeric field 'p'");
  }
  const double p = reply["p"].get<double>();
  if (!(p > 0.0 && p <= 1.0)) {
    throw ProviderFailure(name() + ": probability " + std::to_string(p) + " outside (0, 1]");
  }
  return p;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteEndpoint endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)), parsed_(parse_url(endpoint_.url)), dimension_(dimension) {}

Vector RemoteEmbeddingProvider::embed(std::string_view text) const {
  const nlohmann::json reply = post_json(endpoint_, parsed_, {{"text", std::string(text)}}, name());
  if (!reply.is_object() || !reply.contains("embedding") || !reply["embedding"].is_array()) {
    throw ProviderFailure(name() + ": response lacks array field 'embedding'");
  }
  Vector v;
  v.reserve(reply["embedding"].size());
  for (const auto& x : reply["embedding"]) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) {
      throw ProviderFailure(name() + ": embedding contains a non-finite entry");
    }
    v.push_back(x.get<double>());
  }
  if (v.empty()) throw ProviderFailure(name() + ": empty embedding");
  std::size_t expected = 0;
  if (!dimension_.compare_exchange_strong(expected, v.size()) && expected != v.size()) {
    throw ProviderFailure(name() + ": embedding dimension " + std::to_string(v.size()) +
                          " differs from " + std::to_string(expected));
  }
  return v;
}

bool probe_endpoint(const std::string& url, std::chrono::milliseconds timeout) {
  ParsedUrl parsed;
  try {
    parsed = parse_url(url);
  } catch (const Error&) {
    return false;
  }
  httplib::Client client(parsed.scheme_host_port);
  configure(client, RemoteEndpoint{url, {}, timeout});
  return static_cast<bool>(client.Get(parsed.path));
}

}  // namespace promptpack
