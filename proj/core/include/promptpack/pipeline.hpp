#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "promptpack/abbreviation.hpp"
#include "promptpack/embedding.hpp"
#include "promptpack/exemplars.hpp"
#include "promptpack/fidelity.hpp"
#include "promptpack/lexicon.hpp"
#include "promptpack/pruning.hpp"
#include "promptpack/quantization.hpp"
#include "promptpack/remote.hpp"
#include "promptpack/scoring.hpp"

namespace promptpack {

struct ModelPrice {
  double input_per_1k = 0.0;
  double output_per_1k = 0.0;
};

using PriceTable = std::map<std::string, ModelPrice, std::less<>>;

PriceTable default_price_table();

// tokens / 1000 * input rate of model. Throws Error{UnknownModel}.
double estimate_cost(std::size_t tokens, std::string_view model, const PriceTable& prices);

enum class QuantMode { Off, Uniform, KMeans };
enum class QuantRender { Values, Codes };

struct QuantConfig {
  QuantMode mode = QuantMode::Uniform;
  int bits = 8;
  std::size_t k = 16;
  std::optional<double> tolerance;  // when set, uniform mode plans bits from it
  QuantRender render = QuantRender::Values;
  std::uint64_t seed = 42;
};

struct ProviderConfig {
  enum class Kind { Fallback, Remote };
  Kind kind = Kind::Fallback;
  RemoteEndpoint endpoint;
  std::size_t dimension = 0;  // embedders only; 0 = default / learned
};

struct PipelineConfig {
  Budget budget = Budget::ratio(0.5);
  bool ngram_enabled = true;
  NGramConfig ngram{2, 3, 2};
  QuantConfig quant;
  ExemplarOptions exemplar;
  bool append_dictionary_as_context = false;
  ScoringOptions scoring;
  ProviderConfig scorer;
  ProviderConfig embedder;
  std::vector<std::string> corpus_files;  // empty: bundled corpus
  std::optional<std::string> stopwords_file;
  std::string model = "default";
  PriceTable prices = default_price_table();
  double fidelity_warning = kDefaultFidelityWarning;

  // budget 1.0, abbreviation off, quantization off, no exemplars or dictionary context.
  static PipelineConfig identity();

  // Throws Error{InvalidConfig}.
  void validate() const;

  // Fields present in json override the current values.
  void merge_json(std::string_view json);
  static PipelineConfig from_json(std::string_view json);
  std::string to_json() const;

  // SCORER_ENDPOINT / SCORER_TOKEN / EMBEDDER_ENDPOINT switch the providers to remote.
  void apply_environment();
};

struct Attachment {
  enum class Kind { TextDocument, Table };
  Kind kind = Kind::TextDocument;
  std::string name;
  std::string content;
};

std::string_view to_string(Attachment::Kind kind) noexcept;

struct QuantizedTableColumn {
  std::size_t index = 0;  // column in the table
  QuantizedColumn column;
  double max_error = 0.0;  // worst |reconstructed - original| over the column
};

struct CompressedAttachment {
  std::string name;
  Attachment::Kind kind = Attachment::Kind::TextDocument;
  std::string content;
  std::optional<AbbrevDictionary> dictionary;  // text documents
  std::vector<QuantizedTableColumn> columns;   // tables
  std::size_t original_tokens = 0;
  std::size_t compressed_tokens = 0;
};

struct StageTiming {
  std::string stage;
  double millis = 0.0;
};

struct CompressionReport {
  std::size_t original_tokens = 0;
  std::size_t compressed_tokens = 0;
  double ratio = 1.0;
  std::size_t prompt_original_tokens = 0;
  std::size_t prompt_compressed_tokens = 0;
  std::string model;
  double est_original_cost = 0.0;
  double est_compressed_cost = 0.0;
  double est_savings = 0.0;
  std::optional<SimilarityReport> fidelity;
  bool fidelity_warning = false;
  std::map<std::string, AbbrevDictionary> dictionaries;  // by attachment name
  std::vector<StageTiming> stage_timings;

  // Without stage timings, which are the only non-deterministic field.
  std::string to_json(bool include_timings = true) const;
};

// Token-level view of the prompt decisions; enough to draw a heat map.
struct TokenDetail {
  std::size_t index = 0;
  std::string surface;
  TokenKind kind = TokenKind::Word;
  double s_stat = 0.0;
  double s_dyn = 0.0;
  double s_combined = 0.0;
  std::optional<std::size_t> phrase;  // unset for whitespace outside phrases
  bool kept = true;
};

struct Bundle {
  std::string compressed_prompt;
  std::string pruned_prompt;
  std::vector<CompressedAttachment> attachments;
  std::vector<SelectedExemplar> exemplars;
  std::string dictionary_context;  // appended to compressed_prompt when enabled
};

struct PipelineResult {
  Bundle bundle;
  CompressionReport report;
  std::vector<TokenDetail> token_detail;

  // {compressedPrompt, attachments, dictionary, quantParams, exemplars, report}
  std::string bundle_json(bool include_timings = true) const;
};

inline constexpr std::array<std::string_view, 8> kStageNames = {
    "initialization", "token-probability", "hybrid-scoring", "compression",
    "semantic-similarity", "metrics", "result-assembly", "utility"};

// Corpus-derived models and providers. Building them is the expensive part of
// initialisation, so they can be prepared once and shared between runs.
struct PipelineResources {
  std::shared_ptr<const FrequencyModel> frequency_model;
  std::shared_ptr<const ProbabilityProvider> scorer;
  std::shared_ptr<const EmbeddingProvider> embedder;
  std::shared_ptr<const PhraseGrouper> grouper;
};

// Loads the corpus (bundled when none configured) and builds providers.
// Corpus-derived models are cached process-wide by content hash.
PipelineResources load_resources(const PipelineConfig& config);

struct PipelineInput {
  std::string prompt;
  std::vector<Attachment> attachments;
  std::vector<std::string> exemplar_pool;
};

// Runs the eight stages in order: initialization, token probability
// construction, hybrid scoring, compression, semantic similarity, metrics,
// result assembly, utility. Any stage failure is rethrown as StageFailure
// naming the stage; no partial result is returned.
PipelineResult run_pipeline(const PipelineInput& input, const PipelineConfig& config,
                            const PipelineResources* resources = nullptr);

struct GridCell {
  std::size_t top_k = 0;  // T
  std::size_t n = 0;      // G
  CompressionReport report;
};

// One full pipeline run per (T, G), T-major order.
std::vector<GridCell> ablation_grid(const PipelineInput& input, std::span<const std::size_t> t_grid,
                                    std::span<const std::size_t> g_grid, const PipelineConfig& config);

// Table attachment helpers, shared by the pipeline and the /quantize endpoint.
struct TableCompression {
  std::string content;
  std::vector<QuantizedTableColumn> columns;
};
TableCompression compress_table(std::string_view csv, const QuantConfig& config);

// Rebuilds the table with every quantized column replaced by its
// reconstruction at full precision.
std::string reconstruct_table(std::string_view compressed_csv, std::span<const QuantizedTableColumn> columns);

// Quant sidecar: {columns: [{index, name, params, codes, missing}]}.
std::string columns_to_json(std::span<const QuantizedTableColumn> columns);
std::vector<QuantizedTableColumn> columns_from_json(std::string_view json);

}  // namespace promptpack
