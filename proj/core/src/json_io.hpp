#pragma once

// nlohmann-based conversions shared by the pipeline and the HTTP service.
// Private to the core library.

#include "json.hpp"
#include "promptpack/pipeline.hpp"

namespace promptpack::detail {

nlohmann::json to_json(const AbbrevDictionary& dictionary);
nlohmann::json to_json(const CompressionReport& report, bool include_timings);
nlohmann::json to_json(const PipelineResult& result, bool include_timings);
nlohmann::json to_json(std::span<const TokenDetail> detail);
nlohmann::json to_json(std::span<const QuantizedTableColumn> columns);
nlohmann::json config_to_json(const PipelineConfig& config);
void merge_config(PipelineConfig& config, const nlohmann::json& j);

}  // namespace promptpack::detail
