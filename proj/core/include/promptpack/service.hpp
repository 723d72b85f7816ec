#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "promptpack/pipeline.hpp"

namespace promptpack {

inline constexpr std::string_view kVersion = "0.3.0";

struct ServiceOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::optional<std::string> static_dir;  // served at "/" when set (the web UI build)
  PipelineConfig base_config;             // request configs are merged over this
  std::size_t max_sessions = 256;
  std::chrono::milliseconds health_probe_timeout{1000};
};

// PORT from the environment, or fallback when unset or unparsable.
int port_from_environment(int fallback = 8080);

// JSON over HTTP:
//   POST /compress   {prompt, attachments?, exemplars?, config?, sessionId?} -> {bundle, report, tokenDetail, sessionId}
//   POST /abbreviate {text, n?, topK?, minFreq?}                            -> {text, dictionary}
//   POST /expand     {text, dictionary}                                     -> {text}
//   POST /quantize   {csv | values, mode?, bits?, k?, tolerance?, ...}      -> table or column result
//   GET  /health                                                            -> {status, version, providersReachable}
// Errors: {error: {code, message, stage?}} with 400 / 422 / 502.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket; port 0 picks a free port. Returns the bound port or -1.
  int bind();
  // Blocks serving requests until stop().
  bool listen();
  void stop();
  bool is_running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace promptpack
