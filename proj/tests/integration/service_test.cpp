#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "promptpack/service.hpp"

using nlohmann::json;
using namespace promptpack;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(PROMPTPACK_FIXTURE_DIR) + "/" + name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class RunningService {
 public:
  explicit RunningService(ServiceOptions opts) : service_(std::make_unique<Service>([&] {
    opts.host = "127.0.0.1";
    opts.port = 0;
    return std::move(opts);
  }())) {
    port_ = service_->bind();
    thread_ = std::thread([this] { service_->listen(); });
    while (!service_->is_running()) std::this_thread::yield();
  }
  ~RunningService() {
    service_->stop();
    thread_.join();
  }
  int port() const { return port_; }

 private:
  std::unique_ptr<Service> service_;
  std::thread thread_;
  int port_ = -1;
};

// Minimal stand-in for a remote scorer.
class MockScorer {
 public:
  explicit MockScorer(int status) {
    server_.Post("/p", [status](const httplib::Request&, httplib::Response& res) {
      res.status = status;
      res.set_content(R"({"p": 0.25})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockScorer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/p"; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

struct Reply {
  int status = 0;
  json body;
};

Reply post(int port, const std::string& path, const std::string& body) {
  httplib::Client c("127.0.0.1", port);
  c.set_read_timeout(60, 0);
  auto res = c.Post(path, body, "application/json");
  if (!res) return {};
  return {res->status, res->body.empty() ? json() : json::parse(res->body)};
}

Reply get(int port, const std::string& path) {
  httplib::Client c("127.0.0.1", port);
  auto res = c.Get(path);
  if (!res) return {};
  return {res->status, json::parse(res->body, nullptr, false)};
}

json compress_body(double budget) {
  return {{"prompt", fixture("prompt.txt")},
          {"attachments",
           {{{"name", "filing.txt"}, {"kind", "textDocument"}, {"content", fixture("filing.txt")}},
            {{"name", "segments.csv"}, {"kind", "table"}, {"content", fixture("segments.csv")}}}},
          {"config", {{"budget", budget}}}};
}

json without_timings(json j) {
  j["report"].erase("stageTimings");
  j.erase("sessionId");
  return j;
}

}  // namespace

TEST(Service, HealthReportsFallbackProvidersReachable) {
  RunningService svc({});
  const auto r = get(svc.port(), "/health");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
  EXPECT_EQ(r.body["version"], std::string(kVersion));
  EXPECT_TRUE(r.body["providersReachable"]["scorer"].get<bool>());
  EXPECT_TRUE(r.body["providersReachable"]["embedder"].get<bool>());
}

TEST(Service, HealthStillOkWhenScorerIsDown) {
  ServiceOptions opts;
  int dead_port = 0;
  {
    httplib::Server probe;
    dead_port = probe.bind_to_any_port("127.0.0.1");
  }  // closed again: nothing listens there now
  opts.base_config.scorer.kind = ProviderConfig::Kind::Remote;
  opts.base_config.scorer.endpoint.url = "http://127.0.0.1:" + std::to_string(dead_port) + "/p";
  opts.health_probe_timeout = std::chrono::milliseconds(300);
  RunningService svc(std::move(opts));
  const auto r = get(svc.port(), "/health");
  ASSERT_EQ(r.status, 200);
  EXPECT_FALSE(r.body["providersReachable"]["scorer"].get<bool>());
  EXPECT_TRUE(r.body["providersReachable"]["embedder"].get<bool>());
}

TEST(Service, ErrorStatuses) {
  RunningService svc({});
  EXPECT_EQ(get(svc.port(), "/nowhere").status, 404);
  const auto bad = post(svc.port(), "/compress", "{not json");
  EXPECT_EQ(bad.status, 400);
  EXPECT_TRUE(bad.body["error"].contains("code"));
  EXPECT_EQ(post(svc.port(), "/compress", R"({"attachments": []})").status, 400);
  const auto invalid = post(svc.port(), "/compress", R"({"prompt": "x", "config": {"budget": 2.0}})");
  EXPECT_EQ(invalid.status, 422);
  EXPECT_EQ(invalid.body["error"]["code"], "InvalidConfig");
}

TEST(Service, ProviderFailureIs502WithStage) {
  MockScorer broken(500);
  RunningService svc({});
  json body = {{"prompt", "net income rose sharply this quarter"},
               {"config", {{"providers", {{"scorer", {{"kind", "remote"}, {"endpoint", broken.url()}}}}}}}};
  const auto r = post(svc.port(), "/compress", body.dump());
  EXPECT_EQ(r.status, 502);
  EXPECT_EQ(r.body["error"]["code"], "ProviderFailure");
  EXPECT_EQ(r.body["error"]["stage"], "token-probability");
}

TEST(Service, RemoteScorerIsUsed) {
  MockScorer ok(200);
  RunningService svc({});
  json body = {{"prompt", "net income rose sharply this quarter"},
               {"config", {{"providers", {{"scorer", {{"kind", "remote"}, {"endpoint", ok.url()}}}}}}}};
  const auto r = post(svc.port(), "/compress", body.dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  for (const auto& t : r.body["tokenDetail"]) {
    if (t["kind"] == "word") {
      EXPECT_NEAR(t["sDyn"].get<double>(), 2.0, 1e-12);
    }
  }
}

TEST(Service, IdentityKeepsEveryToken) {
  RunningService svc({});
  json body = compress_body(1.0);
  body["config"]["ngram"] = false;
  body["config"]["quant"] = {{"mode", "off"}};
  const auto r = post(svc.port(), "/compress", body.dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["bundle"]["compressedPrompt"], fixture("prompt.txt"));
  EXPECT_EQ(r.body["report"]["ratio"].get<double>(), 1.0);
  for (const auto& t : r.body["tokenDetail"]) EXPECT_TRUE(t["kept"].get<bool>());
  EXPECT_EQ(r.body["report"]["stageTimings"].size(), 8u);
}

TEST(Service, BudgetBoundsKeptTokens) {
  RunningService svc({});
  const auto r = post(svc.port(), "/compress", compress_body(0.5).dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  std::size_t kept = 0;
  std::size_t total = 0;
  for (const auto& t : r.body["tokenDetail"]) {
    if (t["kind"] == "whitespace") continue;
    ++total;
    if (t["kept"].get<bool>()) ++kept;
  }
  EXPECT_LE(kept, static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(total))));
  EXPECT_EQ(r.body["report"]["promptCompressedTokens"].get<std::size_t>(), kept);
}

TEST(Service, ConcurrentRequestsMatchSequential) {
  RunningService svc({});
  std::vector<json> bodies;
  for (double b : {0.3, 0.5, 0.7, 1.0}) bodies.push_back(compress_body(b));
  std::vector<json> sequential;
  for (const auto& b : bodies) sequential.push_back(without_timings(post(svc.port(), "/compress", b.dump()).body));
  std::vector<std::future<Reply>> futures;
  for (int rep = 0; rep < 2; ++rep) {
    for (const auto& b : bodies) {
      futures.push_back(std::async(std::launch::async, [&, s = b.dump()] { return post(svc.port(), "/compress", s); }));
    }
  }
  for (std::size_t i = 0; i < futures.size(); ++i) {
    const Reply r = futures[i].get();
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(without_timings(r.body), sequential[i % bodies.size()]);
  }
}

TEST(Service, SessionReuseGivesSameResult) {
  RunningService svc({});
  json body = compress_body(0.5);
  body["sessionId"] = "s1";
  const auto a = post(svc.port(), "/compress", body.dump());
  const auto b = post(svc.port(), "/compress", body.dump());
  ASSERT_EQ(a.status, 200);
  EXPECT_EQ(a.body["sessionId"], "s1");
  EXPECT_EQ(without_timings(a.body), without_timings(b.body));
}

TEST(Service, AbbreviateExpandRoundTrip) {
  RunningService svc({});
  const std::string text = fixture("filing.txt");
  const auto a = post(svc.port(), "/abbreviate", json{{"text", text}, {"n", 2}, {"topK", 4}}.dump());
  ASSERT_EQ(a.status, 200) << a.body.dump();
  EXPECT_LT(a.body["text"].get<std::string>().size(), text.size());
  const auto e = post(svc.port(), "/expand", json{{"text", a.body["text"]}, {"dictionary", a.body["dictionary"]}}.dump());
  ASSERT_EQ(e.status, 200);
  EXPECT_EQ(e.body["text"], text);

  const auto tampered =
      post(svc.port(), "/expand", json{{"text", a.body["text"].get<std::string>() + " ZZ9"}, {"dictionary", a.body["dictionary"]}}.dump());
  EXPECT_EQ(tampered.status, 422);
  EXPECT_EQ(tampered.body["error"]["code"], "UnknownPlaceholder");
}

TEST(Service, QuantizeValuesAndCsv) {
  RunningService svc({});
  const auto v = post(svc.port(), "/quantize", R"({"values": [0, 5, null, 10], "bits": 3})");
  ASSERT_EQ(v.status, 200) << v.body.dump();
  EXPECT_EQ(v.body["codes"][0], 0);
  EXPECT_EQ(v.body["codes"][3], 7);
  EXPECT_TRUE(v.body["reconstructed"][2].is_null());
  EXPECT_NEAR(v.body["reconstructed"][1].get<double>(), 40.0 / 7.0, 1e-12);

  const auto c = post(svc.port(), "/quantize", json{{"csv", fixture("segments.csv")}, {"bits", 8}}.dump());
  ASSERT_EQ(c.status, 200) << c.body.dump();
  EXPECT_TRUE(c.body["quantParams"].contains("columns"));
  EXPECT_EQ(post(svc.port(), "/quantize", R"({"values": [1, 2], "bits": 0})").status, 422);
}
