#include <cstdlib>

#include "json_io.hpp"
#include "promptpack/errors.hpp"

namespace promptpack {

PriceTable default_price_table() {
  // Placeholder rates; real deployments supply their own table.
  return {{"default", {0.003, 0.015}}};
}

double estimate_cost(std::size_t tokens, std::string_view model, const PriceTable& prices) {
  const auto it = prices.find(model);
  if (it == prices.end()) throw Error(ErrorCode::UnknownModel, "no price entry for model '" + std::string(model) + "'");
  return static_cast<double>(tokens) / 1000.0 * it->second.input_per_1k;
}

PipelineConfig PipelineConfig::identity() {
  PipelineConfig c;
  c.budget = Budget::ratio(1.0);
  c.ngram_enabled = false;
  c.quant.mode = QuantMode::Off;
  c.exemplar.mode = ExemplarMode::Off;
  c.append_dictionary_as_context = false;
  return c;
}

void PipelineConfig::validate() const {
  if (ngram_enabled) ngram.validate();
  if (quant.mode != QuantMode::Off) {
    if (quant.bits < 1 || quant.bits > kMaxBits) throw Error(ErrorCode::InvalidConfig, "quant.bits must be in [1, 16]");
    if (quant.k < 1) throw Error(ErrorCode::InvalidConfig, "quant.k must be >= 1");
    if (quant.tolerance && !(*quant.tolerance > 0.0)) throw Error(ErrorCode::InvalidConfig, "quant.tolerance must be > 0");
  }
  if (exemplar.mode != ExemplarMode::Off && exemplar.count < 1) {
    throw Error(ErrorCode::InvalidConfig, "exemplar.count must be >= 1");
  }
  if (exemplar.k_range.k_min > exemplar.k_range.k_max) {
    throw Error(ErrorCode::InvalidConfig, "exemplar.kMin must not exceed exemplar.kMax");
  }
  if (!(scoring.threshold >= 0.0)) throw Error(ErrorCode::InvalidConfig, "scoring.threshold must be >= 0");
  if (!prices.contains(model)) throw Error(ErrorCode::UnknownModel, "no price entry for model '" + model + "'");
  for (const ProviderConfig* p : {&scorer, &embedder}) {
    if (p->kind == ProviderConfig::Kind::Remote) parse_url(p->endpoint.url);
  }
}

namespace {

std::string_view quant_mode_name(QuantMode m) {
  switch (m) {
    case QuantMode::Off: return "off";
    case QuantMode::Uniform: return "uniform";
    case QuantMode::KMeans: return "kmeans";
  }
  return "off";
}

std::string_view exemplar_mode_name(ExemplarMode m) {
  switch (m) {
    case ExemplarMode::Off: return "off";
    case ExemplarMode::Random: return "random";
    case ExemplarMode::Representative: return "representative";
  }
  return "off";
}

nlohmann::json provider_to_json(const ProviderConfig& p) {
  nlohmann::json j = {{"kind", p.kind == ProviderConfig::Kind::Remote ? "remote" : "fallback"},
                      {"endpoint", p.endpoint.url},
                      {"timeoutMs", p.endpoint.timeout.count()}};
  if (p.dimension != 0) j["dimension"] = p.dimension;
  // The auth token is deliberately never serialised.
  return j;
}

void merge_provider(ProviderConfig& p, const nlohmann::json& j) {
  if (j.contains("kind")) {
    const auto kind = j["kind"].get<std::string>();
    if (kind == "fallback") {
      p.kind = ProviderConfig::Kind::Fallback;
    } else if (kind == "remote") {
      p.kind = ProviderConfig::Kind::Remote;
    } else {
      throw Error(ErrorCode::InvalidConfig, "provider kind must be 'fallback' or 'remote'");
    }
  }
  if (j.contains("endpoint")) p.endpoint.url = j["endpoint"].get<std::string>();
  if (j.contains("token")) p.endpoint.auth_token = j["token"].get<std::string>();
  if (j.contains("timeoutMs")) p.endpoint.timeout = std::chrono::milliseconds(j["timeoutMs"].get<std::int64_t>());
  if (j.contains("dimension")) p.dimension = j["dimension"].get<std::size_t>();
}

}  // namespace

namespace detail {

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json budget = c.budget.mode() == Budget::Mode::Ratio
                              ? nlohmann::json{{"mode", "ratio"}, {"value", c.budget.ratio_value()}}
                              : nlohmann::json{{"mode", "maxTokens"}, {"value", c.budget.max_tokens_value()}};
  nlohmann::json prices = nlohmann::json::object();
  for (const auto& [name, p] : c.prices) prices[name] = {{"input", p.input_per_1k}, {"output", p.output_per_1k}};
  return {
      {"budget", std::move(budget)},
      {"ngram", {{"enabled", c.ngram_enabled}, {"n", c.ngram.n}, {"topK", c.ngram.top_k}, {"minFreq", c.ngram.min_freq}}},
      {"quant",
       {{"mode", quant_mode_name(c.quant.mode)},
        {"bits", c.quant.bits},
        {"k", c.quant.k},
        {"tolerance", c.quant.tolerance ? nlohmann::json(*c.quant.tolerance) : nlohmann::json(nullptr)},
        {"render", c.quant.render == QuantRender::Codes ? "codes" : "values"},
        {"seed", c.quant.seed}}},
      {"exemplar",
       {{"mode", exemplar_mode_name(c.exemplar.mode)},
        {"count", c.exemplar.count},
        {"seed", c.exemplar.seed},
        {"kMin", c.exemplar.k_range.k_min},
        {"kMax", c.exemplar.k_range.k_max}}},
      {"appendDictionaryAsContext", c.append_dictionary_as_context},
      {"scoring", {{"threshold", c.scoring.threshold}, {"parallelism", c.scoring.parallelism}}},
      {"providers", {{"scorer", provider_to_json(c.scorer)}, {"embedder", provider_to_json(c.embedder)}}},
      {"corpus", c.corpus_files},
      {"stopwords", c.stopwords_file ? nlohmann::json(*c.stopwords_file) : nlohmann::json(nullptr)},
      {"model", c.model},
      {"priceTable", std::move(prices)},
      {"fidelityWarning", c.fidelity_warning},
  };
}

void merge_config(PipelineConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  try {
    if (j.contains("budget")) {
      const auto& b = j["budget"];
      if (b.is_number()) {
        c.budget = Budget::ratio(b.get<double>());
      } else {
        const std::string mode = b.value("mode", std::string("ratio"));
        if (mode == "ratio") {
          c.budget = Budget::ratio(b.at("value").get<double>());
        } else if (mode == "maxTokens") {
          c.budget = Budget::max_tokens(b.at("value").get<std::size_t>());
        } else {
          throw Error(ErrorCode::InvalidConfig, "budget.mode must be 'ratio' or 'maxTokens'");
        }
      }
    }
    if (j.contains("ngram")) {
      const auto& g = j["ngram"];
      if (g.is_boolean()) {
        c.ngram_enabled = g.get<bool>();
      } else {
        c.ngram_enabled = g.value("enabled", c.ngram_enabled);
        c.ngram.n = g.value("n", c.ngram.n);
        c.ngram.top_k = g.value("topK", c.ngram.top_k);
        c.ngram.min_freq = g.value("minFreq", c.ngram.min_freq);
      }
    }
    if (j.contains("quant")) {
      const auto& q = j["quant"];
      if (q.contains("mode")) {
        const auto m = q["mode"].get<std::string>();
        if (m == "off") c.quant.mode = QuantMode::Off;
        else if (m == "uniform") c.quant.mode = QuantMode::Uniform;
        else if (m == "kmeans") c.quant.mode = QuantMode::KMeans;
        else throw Error(ErrorCode::InvalidConfig, "quant.mode must be off, uniform or kmeans");
      }
      c.quant.bits = q.value("bits", c.quant.bits);
      c.quant.k = q.value("k", c.quant.k);
      if (q.contains("tolerance")) {
        c.quant.tolerance = q["tolerance"].is_null() ? std::nullopt : std::optional<double>(q["tolerance"].get<double>());
      }
      if (q.contains("render")) {
        const auto r = q["render"].get<std::string>();
        if (r == "values") c.quant.render = QuantRender::Values;
        else if (r == "codes") c.quant.render = QuantRender::Codes;
        else throw Error(ErrorCode::InvalidConfig, "quant.render must be values or codes");
      }
      c.quant.seed = q.value("seed", c.quant.seed);
    }
    if (j.contains("exemplar")) {
      const auto& e = j["exemplar"];
      if (e.contains("mode")) {
        const auto m = e["mode"].get<std::string>();
        if (m == "off") c.exemplar.mode = ExemplarMode::Off;
        else if (m == "random") c.exemplar.mode = ExemplarMode::Random;
        else if (m == "representative") c.exemplar.mode = ExemplarMode::Representative;
        else throw Error(ErrorCode::InvalidConfig, "exemplar.mode must be off, random or representative");
      }
      c.exemplar.count = e.value("count", c.exemplar.count);
      c.exemplar.seed = e.value("seed", c.exemplar.seed);
      c.exemplar.k_range.k_min = e.value("kMin", c.exemplar.k_range.k_min);
      c.exemplar.k_range.k_max = e.value("kMax", c.exemplar.k_range.k_max);
    }
    c.append_dictionary_as_context = j.value("appendDictionaryAsContext", c.append_dictionary_as_context);
    if (j.contains("scoring")) {
      c.scoring.threshold = j["scoring"].value("threshold", c.scoring.threshold);
      c.scoring.parallelism = j["scoring"].value("parallelism", c.scoring.parallelism);
    }
    if (j.contains("providers")) {
      if (j["providers"].contains("scorer")) merge_provider(c.scorer, j["providers"]["scorer"]);
      if (j["providers"].contains("embedder")) merge_provider(c.embedder, j["providers"]["embedder"]);
    }
    if (j.contains("corpus")) c.corpus_files = j["corpus"].get<std::vector<std::string>>();
    if (j.contains("stopwords")) {
      c.stopwords_file = j["stopwords"].is_null() ? std::nullopt : std::optional<std::string>(j["stopwords"].get<std::string>());
    }
    c.model = j.value("model", c.model);
    if (j.contains("priceTable")) {
      PriceTable prices;
      for (const auto& [name, p] : j["priceTable"].items()) {
        prices[name] = {p.at("input").get<double>(), p.value("output", 0.0)};
      }
      c.prices = std::move(prices);
    }
    c.fidelity_warning = j.value("fidelityWarning", c.fidelity_warning);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
}

}  // namespace detail

void PipelineConfig::merge_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  detail::merge_config(*this, j);
}

PipelineConfig PipelineConfig::from_json(std::string_view json) {
  PipelineConfig c;
  c.merge_json(json);
  return c;
}

std::string PipelineConfig::to_json() const { return detail::config_to_json(*this).dump(2); }

void PipelineConfig::apply_environment() {
  if (const char* v = std::getenv("SCORER_ENDPOINT"); v != nullptr && *v != '\0') {
    scorer.kind = ProviderConfig::Kind::Remote;
    scorer.endpoint.url = v;
  }
  if (const char* v = std::getenv("SCORER_TOKEN"); v != nullptr && *v != '\0') scorer.endpoint.auth_token = v;
  if (const char* v = std::getenv("EMBEDDER_ENDPOINT"); v != nullptr && *v != '\0') {
    embedder.kind = ProviderConfig::Kind::Remote;
    embedder.endpoint.url = v;
  }
}

}  // namespace promptpack
