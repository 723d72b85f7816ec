#include "promptpack/service.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "httplib.h"
#include "json_io.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/hashing.hpp"
#include "promptpack/table.hpp"

namespace promptpack {

int port_from_environment(int fallback) {
  const char* v = std::getenv("PORT");
  if (v == nullptr || *v == '\0') return fallback;
  int port = 0;
  const std::string_view s(v);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), port);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || port < 0 || port > 65535) return fallback;
  return port;
}

namespace {

using ProbabilityMap = std::unordered_map<std::string, double>;

std::string probability_key(std::span<const std::string_view> context, std::string_view token) {
  std::string key;
  for (auto c : context) {
    key += c;
    key += '\x1f';
  }
  key += '\x1e';
  key += token;
  return key;
}

// Serves probabilities from a frozen snapshot, asking the wrapped provider
// for anything missing and remembering it for the next snapshot.
class CachingProvider final : public ProbabilityProvider {
 public:
  CachingProvider(std::shared_ptr<const ProbabilityProvider> inner, std::shared_ptr<const ProbabilityMap> frozen)
      : inner_(std::move(inner)), frozen_(std::move(frozen)) {}

  double probability(std::span<const std::string_view> context, std::string_view token) const override {
    std::string key = probability_key(context, token);
    if (auto it = frozen_->find(key); it != frozen_->end()) return it->second;
    {
      std::lock_guard lock(mutex_);
      if (auto it = fresh_.find(key); it != fresh_.end()) return it->second;
    }
    const double p = inner_->probability(context, token);
    std::lock_guard lock(mutex_);
    fresh_.emplace(std::move(key), p);
    return p;
  }
  bool concurrency_safe() const noexcept override { return inner_->concurrency_safe(); }
  std::string name() const override { return inner_->name(); }

  std::shared_ptr<const ProbabilityMap> snapshot() const {
    std::lock_guard lock(mutex_);
    if (fresh_.empty()) return frozen_;
    auto merged = std::make_shared<ProbabilityMap>(*frozen_);
    merged->insert(fresh_.begin(), fresh_.end());
    return merged;
  }

 private:
  std::shared_ptr<const ProbabilityProvider> inner_;
  std::shared_ptr<const ProbabilityMap> frozen_;
  mutable std::mutex mutex_;
  mutable ProbabilityMap fresh_;
};

struct SessionState {
  std::string content_hash;  // prompt + scorer identity the cached scores belong to
  std::shared_ptr<const ProbabilityMap> probabilities;
};

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status(status), code(std::move(code)) {}
  int status;
  std::string code;
};

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw HttpError(400, "ParseError", "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw HttpError(400, "ParseError", std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& body, const char* name) {
  if (!body.contains(name)) throw HttpError(400, "ParseError", std::string("missing field '") + name + "'");
  try {
    return body[name].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw HttpError(400, "ParseError", std::string("field '") + name + "' has the wrong type");
  }
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return 400;
    case ErrorCode::ProviderFailure: return 502;
    default: return 422;
  }
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message,
                const std::string* stage = nullptr) {
  nlohmann::json err = {{"code", code}, {"message", message}};
  if (stage != nullptr) err["stage"] = *stage;
  send_json(res, status, {{"error", std::move(err)}});
}

template <typename F>
httplib::Server::Handler guarded(F body) {
  return [body](const httplib::Request& req, httplib::Response& res) {
    try {
      body(req, res);
    } catch (const HttpError& e) {
      send_error(res, e.status, e.code, e.what());
    } catch (const StageFailure& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what(), &e.stage());
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

std::vector<Attachment> parse_attachments(const nlohmann::json& body) {
  std::vector<Attachment> out;
  if (!body.contains("attachments")) return out;
  if (!body["attachments"].is_array()) throw HttpError(400, "ParseError", "'attachments' must be an array");
  for (const auto& a : body["attachments"]) {
    Attachment att;
    att.name = a.value("name", "attachment" + std::to_string(out.size() + 1));
    const std::string kind = a.value("kind", std::string("textDocument"));
    if (kind == "table") {
      att.kind = Attachment::Kind::Table;
    } else if (kind == "textDocument") {
      att.kind = Attachment::Kind::TextDocument;
    } else {
      throw HttpError(400, "ParseError", "attachment kind must be textDocument or table");
    }
    att.content = field<std::string>(a, "content");
    out.push_back(std::move(att));
  }
  return out;
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::shared_mutex sessions_mutex;
  std::unordered_map<std::string, std::shared_ptr<const SessionState>> sessions;
  std::atomic<std::uint64_t> anonymous_counter{0};

  explicit Impl(ServiceOptions o) : options(std::move(o)) { routes(); }

  std::shared_ptr<const SessionState> session(const std::string& id) {
    std::shared_lock lock(sessions_mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  void store_session(const std::string& id, std::shared_ptr<const SessionState> state) {
    std::unique_lock lock(sessions_mutex);
    if (sessions.size() >= options.max_sessions && !sessions.contains(id)) sessions.erase(sessions.begin());
    sessions[id] = std::move(state);
  }

  void compress(const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    PipelineInput input;
    input.prompt = field<std::string>(body, "prompt");
    input.attachments = parse_attachments(body);
    if (body.contains("exemplars")) input.exemplar_pool = field<std::vector<std::string>>(body, "exemplars");

    PipelineConfig config = options.base_config;
    if (body.contains("config")) detail::merge_config(config, body["config"]);
    try {
      config.validate();
    } catch (const Error& e) {
      throw HttpError(422, std::string(to_string(e.code())), e.what());
    }

    const std::string session_id = body.contains("sessionId")
                                       ? field<std::string>(body, "sessionId")
                                       : "anon-" + std::to_string(anonymous_counter.fetch_add(1));
    PipelineResources resources = load_resources(config);
    const std::string hash = content_hash(input.prompt + '\0' + resources.scorer->name());
    auto previous = session(session_id);
    auto frozen = previous && previous->content_hash == hash ? previous->probabilities
                                                             : std::make_shared<const ProbabilityMap>();
    auto caching = std::make_shared<CachingProvider>(resources.scorer, frozen);
    resources.scorer = caching;

    const PipelineResult result = run_pipeline(input, config, &resources);
    if (body.contains("sessionId")) {
      store_session(session_id, std::make_shared<const SessionState>(SessionState{hash, caching->snapshot()}));
    }

    nlohmann::json bundle = detail::to_json(result, true);
    nlohmann::json report = std::move(bundle["report"]);
    bundle.erase("report");
    send_json(res, 200,
              {{"bundle", std::move(bundle)},
               {"report", std::move(report)},
               {"tokenDetail", detail::to_json(std::span<const TokenDetail>(result.token_detail))},
               {"sessionId", session_id}});
  }

  void abbreviate_route(const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    NGramConfig cfg = options.base_config.ngram;
    cfg.n = body.value("n", cfg.n);
    cfg.top_k = body.value("topK", cfg.top_k);
    cfg.min_freq = body.value("minFreq", cfg.min_freq);
    const AbbreviatedText out = abbreviate_text(field<std::string>(body, "text"), cfg);
    send_json(res, 200, {{"text", out.text}, {"dictionary", detail::to_json(out.dictionary)}});
  }

  void expand_route(const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    if (!body.contains("dictionary")) throw HttpError(400, "ParseError", "missing field 'dictionary'");
    AbbreviatedText in;
    in.text = field<std::string>(body, "text");
    in.dictionary = AbbrevDictionary::from_json(body["dictionary"].dump());
    send_json(res, 200, {{"text", expand(in)}});
  }

  void quantize_route(const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    nlohmann::json cfg_json = nlohmann::json::object();
    for (const char* k : {"mode", "bits", "k", "tolerance", "render", "seed"}) {
      if (body.contains(k)) cfg_json[k] = body[k];
    }
    PipelineConfig scratch = options.base_config;
    if (scratch.quant.mode == QuantMode::Off) scratch.quant.mode = QuantMode::Uniform;
    detail::merge_config(scratch, {{"quant", cfg_json}});
    const QuantConfig& q = scratch.quant;
    if (q.mode == QuantMode::Off) throw HttpError(422, "InvalidConfig", "quantize: mode must be uniform or kmeans");

    if (body.contains("values")) {
      NumericColumn column;
      column.name = body.value("name", std::string("values"));
      for (const auto& v : body["values"]) {
        if (v.is_null()) {
          column.values.push_back(0.0);
          column.missing.push_back(true);
        } else if (v.is_number()) {
          column.values.push_back(v.get<double>());
          column.missing.push_back(false);
        } else {
          throw HttpError(400, "ParseError", "'values' must hold numbers or null");
        }
      }
      QuantizedColumn out;
      if (q.mode == QuantMode::Uniform) {
        out = quantize_uniform(column, q.tolerance ? plan_bits_for_tolerance(column, *q.tolerance) : q.bits);
      } else {
        out = quantize_kmeans(column, q.k, q.seed);
      }
      const NumericColumn rec = dequantize(out);
      nlohmann::json recon = nlohmann::json::array();
      for (std::size_t i = 0; i < rec.values.size(); ++i) {
        recon.push_back(rec.is_missing(i) ? nlohmann::json(nullptr) : nlohmann::json(rec.values[i]));
      }
      send_json(res, 200,
                {{"codes", out.codes},
                 {"params", nlohmann::json::parse(out.params_json())},
                 {"reconstructed", std::move(recon)}});
      return;
    }

    const TableCompression t = compress_table(field<std::string>(body, "csv"), q);
    send_json(res, 200,
              {{"content", t.content},
               {"quantParams", detail::to_json(std::span<const QuantizedTableColumn>(t.columns))},
               {"reconstructed", reconstruct_table(t.content, t.columns)}});
  }

  void health(const httplib::Request&, httplib::Response& res) {
    auto reachable = [&](const ProviderConfig& p) {
      return p.kind == ProviderConfig::Kind::Fallback || probe_endpoint(p.endpoint.url, options.health_probe_timeout);
    };
    send_json(res, 200,
              {{"status", "ok"},
               {"version", kVersion},
               {"providersReachable",
                {{"scorer", reachable(options.base_config.scorer)},
                 {"embedder", reachable(options.base_config.embedder)}}}});
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type, Authorization"}});
    server.set_payload_max_length(64 * 1024 * 1024);
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Post("/compress", guarded([this](const auto& q, auto& r) { compress(q, r); }));
    server.Post("/abbreviate", guarded([this](const auto& q, auto& r) { abbreviate_route(q, r); }));
    server.Post("/expand", guarded([this](const auto& q, auto& r) { expand_route(q, r); }));
    server.Post("/quantize", guarded([this](const auto& q, auto& r) { quantize_route(q, r); }));
    server.Get("/health", guarded([this](const auto& q, auto& r) { health(q, r); }));
    if (options.static_dir) server.set_mount_point("/", *options.static_dir);
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) send_error(res, 404, "NotFound", "no such route");
    });
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() { stop(); }

int Service::bind() {
  if (impl_->options.port == 0) return impl_->server.bind_to_any_port(impl_->options.host);
  return impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool Service::is_running() const { return impl_->server.is_running(); }

}  // namespace promptpack
