#include "json_io.hpp"

#include "promptpack/table.hpp"

namespace promptpack {

namespace detail {

nlohmann::json to_json(const AbbrevDictionary& dictionary) { return nlohmann::json::parse(dictionary.to_json()); }

nlohmann::json to_json(const CompressionReport& r, bool include_timings) {
  nlohmann::json dicts = nlohmann::json::object();
  for (const auto& [name, d] : r.dictionaries) dicts[name] = to_json(d);
  nlohmann::json j = {
      {"originalTokens", r.original_tokens},
      {"compressedTokens", r.compressed_tokens},
      {"ratio", r.ratio},
      {"promptOriginalTokens", r.prompt_original_tokens},
      {"promptCompressedTokens", r.prompt_compressed_tokens},
      {"model", r.model},
      {"estOriginalCost", r.est_original_cost},
      {"estCompressedCost", r.est_compressed_cost},
      {"estSavings", r.est_savings},
      {"fidelity", r.fidelity ? nlohmann::json::parse(r.fidelity->to_json()) : nlohmann::json(nullptr)},
      {"fidelityWarning", r.fidelity_warning},
      // first text attachment's dictionary; all of them under "dictionaries"
      {"dictionary", r.dictionaries.empty() ? nlohmann::json(nullptr) : to_json(r.dictionaries.begin()->second)},
      {"dictionaries", std::move(dicts)},
  };
  if (include_timings) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& s : r.stage_timings) t.push_back({{"stage", s.stage}, {"ms", s.millis}});
    j["stageTimings"] = std::move(t);
  }
  return j;
}

nlohmann::json to_json(std::span<const QuantizedTableColumn> columns) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& q : columns) {
    cols.push_back({
        {"index", q.index},
        {"name", q.column.name},
        {"params", nlohmann::json::parse(q.column.params_json())},
        {"codes", q.column.codes},
        {"missing", q.column.missing},
        {"maxError", q.max_error},
    });
  }
  return {{"columns", std::move(cols)}};
}

nlohmann::json to_json(std::span<const TokenDetail> detail) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : detail) {
    out.push_back({
        {"index", d.index},
        {"surface", d.surface},
        {"kind", to_string(d.kind)},
        {"sStat", d.s_stat},
        {"sDyn", d.s_dyn},
        {"sCombined", d.s_combined},
        {"phrase", d.phrase ? nlohmann::json(*d.phrase) : nlohmann::json(nullptr)},
        {"kept", d.kept},
    });
  }
  return out;
}

nlohmann::json to_json(const PipelineResult& result, bool include_timings) {
  const Bundle& b = result.bundle;
  nlohmann::json attachments = nlohmann::json::array();
  nlohmann::json quant = nlohmann::json::object();
  for (const auto& a : b.attachments) {
    nlohmann::json item = {
        {"name", a.name},
        {"kind", to_string(a.kind)},
        {"content", a.content},
        {"originalTokens", a.original_tokens},
        {"compressedTokens", a.compressed_tokens},
    };
    if (a.dictionary) item["dictionary"] = to_json(*a.dictionary);
    if (a.kind == Attachment::Kind::Table) {
      item["quantParams"] = to_json(std::span<const QuantizedTableColumn>(a.columns));
      quant[a.name] = item["quantParams"];
    }
    attachments.push_back(std::move(item));
  }
  nlohmann::json exemplars = nlohmann::json::array();
  for (const auto& e : b.exemplars) {
    exemplars.push_back({{"item", e.item}, {"clusterId", e.cluster ? nlohmann::json(*e.cluster) : nlohmann::json(nullptr)}});
  }
  nlohmann::json report = to_json(result.report, include_timings);
  return {
      {"compressedPrompt", b.compressed_prompt},
      {"prunedPrompt", b.pruned_prompt},
      {"attachments", std::move(attachments)},
      {"dictionary", report["dictionary"]},
      {"quantParams", std::move(quant)},
      {"exemplars", std::move(exemplars)},
      {"dictionaryContext", b.dictionary_context},
      {"report", std::move(report)},
  };
}

}  // namespace detail

std::string CompressionReport::to_json(bool include_timings) const {
  return detail::to_json(*this, include_timings).dump(2);
}

std::string PipelineResult::bundle_json(bool include_timings) const {
  return detail::to_json(*this, include_timings).dump(2);
}

}  // namespace promptpack
