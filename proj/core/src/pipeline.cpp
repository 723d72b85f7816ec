#include "promptpack/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "json_io.hpp"
#include "promptpack/bundled_data.hpp"
#include "promptpack/hashing.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/table.hpp"

namespace promptpack {

std::string_view to_string(Attachment::Kind kind) noexcept {
  return kind == Attachment::Kind::Table ? "table" : "textDocument";
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CorpusModels {
  std::shared_ptr<const FallbackBigramProvider> bigrams;
  std::shared_ptr<const PhraseGrouper> grouper;
};

// keyed by content hash of corpus + stopwords
std::mutex g_cache_mutex;
std::unordered_map<std::string, CorpusModels> g_cache;

CorpusModels corpus_models(const PipelineConfig& config) {
  std::string corpus_text;
  if (config.corpus_files.empty()) {
    corpus_text = bundled::corpus();
  } else {
    for (const auto& path : config.corpus_files) {
      corpus_text += read_file(path);
      corpus_text += '\n';
    }
  }
  std::optional<std::string> stopwords_text;
  if (config.stopwords_file) stopwords_text = read_file(*config.stopwords_file);

  std::string key = content_hash(corpus_text);
  key += stopwords_text ? content_hash(*stopwords_text) : std::string("bundled");

  std::lock_guard lock(g_cache_mutex);
  if (auto it = g_cache.find(key); it != g_cache.end()) return it->second;

  const auto lines = split_corpus_lines(corpus_text);
  CorpusModels models;
  models.bigrams = std::make_shared<const FallbackBigramProvider>(lines);
  models.grouper = stopwords_text ? std::make_shared<const RuleBasedChunker>(parse_stopwords(*stopwords_text))
                                  : std::make_shared<const RuleBasedChunker>();
  g_cache.emplace(std::move(key), models);
  return models;
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, r.ptr);
  return s == "-0" ? "0" : s;
}

template <typename F>
auto run_stage(std::string_view stage, std::vector<StageTiming>& timings, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    const std::chrono::duration<double, std::milli> d = std::chrono::steady_clock::now() - start;
    timings.push_back({std::string(stage), d.count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record();
    } else {
      auto out = body();
      record();
      return out;
    }
  } catch (const StageFailure&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure(std::string(stage), e.code(), e.what());
  } catch (const std::exception& e) {
    throw StageFailure(std::string(stage), ErrorCode::InvalidArgument, e.what());
  }
}

bool has_lexical(std::string_view text) {
  const TokenStream s = tokenize(std::string(text));
  return std::any_of(s.tokens().begin(), s.tokens().end(), [](const Token& t) { return t.is_lexical(); });
}

std::string dictionary_context(const std::vector<CompressedAttachment>& attachments) {
  std::string out;
  for (const auto& a : attachments) {
    if (!a.dictionary || a.dictionary->empty()) continue;
    if (!out.empty()) out += '\n';
    out += "Abbreviations in " + a.name + ":\n";
    for (const auto& e : a.dictionary->entries()) out += e.placeholder + " = " + e.ngram + "\n";
  }
  return out;
}

}  // namespace

PipelineResources load_resources(const PipelineConfig& config) {
  const CorpusModels models = corpus_models(config);
  PipelineResources r;
  r.frequency_model = std::shared_ptr<const FrequencyModel>(models.bigrams, &models.bigrams->unigrams());
  if (config.scorer.kind == ProviderConfig::Kind::Remote) {
    r.scorer = std::make_shared<const RemoteProbabilityProvider>(config.scorer.endpoint);
  } else {
    r.scorer = models.bigrams;
  }
  if (config.embedder.kind == ProviderConfig::Kind::Remote) {
    r.embedder = std::make_shared<const RemoteEmbeddingProvider>(config.embedder.endpoint, config.embedder.dimension);
  } else {
    r.embedder = std::make_shared<const HashingEmbedder>(
        config.embedder.dimension != 0 ? config.embedder.dimension : HashingEmbedder::kDefaultDimension);
  }
  r.grouper = models.grouper;
  return r;
}

TableCompression compress_table(std::string_view csv, const QuantConfig& config) {
  Table table = parse_csv(csv);
  TableCompression out;
  if (config.mode == QuantMode::Off) {
    out.content = std::string(csv);
    return out;
  }
  for (std::size_t c : numeric_columns(table)) {
    const NumericColumn column = column_as_numeric(table, c);
    if (column.present_count() == 0) continue;

    QuantizedTableColumn q;
    q.index = c;
    double target = 0.0;  // allowed reconstruction error of the rendered cells; 0 = exact centroid values
    if (config.mode == QuantMode::Uniform) {
      const int bits = config.tolerance ? plan_bits_for_tolerance(column, *config.tolerance) : config.bits;
      q.column = quantize_uniform(column, bits);
      target = config.tolerance ? *config.tolerance : std::get<UniformQuantParams>(q.column.params).max_error();
    } else {
      std::vector<double> distinct;
      for (std::size_t i = 0; i < column.values.size(); ++i) {
        if (!column.is_missing(i)) distinct.push_back(column.values[i]);
      }
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      q.column = quantize_kmeans(column, std::min(config.k, distinct.size()), config.seed);
      if (config.tolerance) target = *config.tolerance;
    }
    const NumericColumn rec = dequantize(q.column);
    for (std::size_t i = 0; i < column.values.size(); ++i) {
      if (!column.is_missing(i)) q.max_error = std::max(q.max_error, std::abs(rec.values[i] - column.values[i]));
    }

    // Rounding the rendered value may use whatever error budget quantization left over.
    const double slack = target - q.max_error;
    const bool exact = !(slack >= 1e-12);
    const int decimals = exact ? 0 : decimals_for_tolerance(slack);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (c >= table.rows[r].size() || column.is_missing(r)) continue;
      if (config.render == QuantRender::Codes) {
        table.rows[r][c] = std::to_string(q.column.codes[r]);
      } else {
        table.rows[r][c] = exact ? shortest(rec.values[r]) : format_decimal(rec.values[r], decimals);
      }
    }
    out.columns.push_back(std::move(q));
  }
  out.content = write_csv(table);
  return out;
}

std::string reconstruct_table(std::string_view compressed_csv, std::span<const QuantizedTableColumn> columns) {
  Table table = parse_csv(compressed_csv);
  for (const auto& q : columns) {
    const NumericColumn rec = dequantize(q.column);
    for (std::size_t r = 0; r < table.rows.size() && r < rec.values.size(); ++r) {
      if (q.index >= table.rows[r].size()) continue;
      table.rows[r][q.index] = rec.is_missing(r) ? std::string() : shortest(rec.values[r]);
    }
  }
  return write_csv(table);
}

std::string columns_to_json(std::span<const QuantizedTableColumn> columns) {
  return detail::to_json(columns).dump();
}

std::vector<QuantizedTableColumn> columns_from_json(std::string_view json) {
  std::vector<QuantizedTableColumn> out;
  try {
    const auto j = nlohmann::json::parse(json);
    for (const auto& c : j.at("columns")) {
      QuantizedTableColumn q;
      q.index = c.at("index").get<std::size_t>();
      q.column.name = c.at("name").get<std::string>();
      q.column.codes = c.at("codes").get<std::vector<std::uint32_t>>();
      q.column.missing = c.value("missing", std::vector<bool>{});
      q.column.params = parse_quant_params(c.at("params").dump());
      q.max_error = c.value("maxError", 0.0);
      if (!q.column.missing.empty() && q.column.missing.size() != q.column.codes.size()) {
        throw Error(ErrorCode::ParseError, "quant sidecar: missing mask length differs from codes");
      }
      out.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("quant sidecar: ") + e.what());
  }
  return out;
}

PipelineResult run_pipeline(const PipelineInput& input, const PipelineConfig& config,
                            const PipelineResources* resources) {
  std::vector<StageTiming> timings;
  PipelineResult result;
  CompressionReport& report = result.report;
  Bundle& bundle = result.bundle;

  PipelineResources res;
  TokenStream stream;
  run_stage(kStageNames[0], timings, [&] {
    config.validate();
    for (const auto& a : input.attachments) {
      if (a.kind == Attachment::Kind::Table) parse_csv(a.content);
    }
    res = resources != nullptr ? *resources : load_resources(config);
    stream = tokenize(input.prompt);
  });

  std::vector<ScoredToken> scored;
  run_stage(kStageNames[1], timings, [&] {
    ScoringOptions opts = config.scoring;
    scored = score_stream(stream, *res.frequency_model, *res.scorer, opts);
  });

  std::vector<Phrase> phrases;
  run_stage(kStageNames[2], timings, [&] {
    phrases = score_phrases(res.grouper->group(stream), scored);
  });

  std::vector<std::string> exemplar_texts;
  std::vector<bool> phrase_kept;
  run_stage(kStageNames[3], timings, [&] {
    if (config.budget.is_identity() || phrases.empty()) {
      bundle.pruned_prompt = input.prompt;
      phrase_kept.assign(phrases.size(), true);
    } else {
      const PrunedPrompt pruned = prune(stream, scored, phrases, config.budget);
      bundle.pruned_prompt = pruned.text;
      phrase_kept.assign(phrases.size(), false);
      for (std::size_t id : pruned.kept_phrase_ids) phrase_kept[id] = true;
    }

    for (const auto& a : input.attachments) {
      CompressedAttachment ca;
      ca.name = a.name;
      ca.kind = a.kind;
      if (a.kind == Attachment::Kind::TextDocument) {
        if (config.ngram_enabled) {
          AbbreviatedText abbr = abbreviate_text(a.content, config.ngram);
          ca.content = std::move(abbr.text);
          ca.dictionary = std::move(abbr.dictionary);
        } else {
          ca.content = a.content;
        }
      } else {
        TableCompression t = compress_table(a.content, config.quant);
        ca.content = std::move(t.content);
        ca.columns = std::move(t.columns);
      }
      bundle.attachments.push_back(std::move(ca));
    }

    bundle.exemplars = choose_exemplars(input.exemplar_pool, *res.embedder, config.exemplar);
    for (const auto& e : bundle.exemplars) exemplar_texts.push_back(input.exemplar_pool[e.item]);
    if (config.append_dictionary_as_context) bundle.dictionary_context = dictionary_context(bundle.attachments);
  });

  run_stage(kStageNames[4], timings, [&] {
    std::vector<TextPair> pairs;
    if (has_lexical(input.prompt) && has_lexical(bundle.pruned_prompt)) {
      pairs.push_back({"prompt", input.prompt, bundle.pruned_prompt});
    }
    for (std::size_t i = 0; i < input.attachments.size(); ++i) {
      const auto& a = input.attachments[i];
      const auto& ca = bundle.attachments[i];
      if (has_lexical(a.content) && has_lexical(ca.content)) pairs.push_back({a.name, a.content, ca.content});
    }
    if (!pairs.empty()) report.fidelity = similarity_report(pairs, *res.embedder);
  });

  std::string exemplar_block;
  for (std::size_t i = 0; i < exemplar_texts.size(); ++i) {
    exemplar_block += "Example " + std::to_string(i + 1) + ":\n" + exemplar_texts[i] + "\n\n";
  }
  std::string context_block;
  if (!bundle.dictionary_context.empty()) context_block = "\n\n" + bundle.dictionary_context;

  run_stage(kStageNames[5], timings, [&] {
    report.prompt_original_tokens = stream.countable_size();
    report.prompt_compressed_tokens = count_tokens(bundle.pruned_prompt);
    std::size_t original = report.prompt_original_tokens;
    std::size_t compressed = count_tokens(exemplar_block) + report.prompt_compressed_tokens + count_tokens(context_block);
    if (config.exemplar.mode != ExemplarMode::Off) {
      for (const auto& e : input.exemplar_pool) original += count_tokens(e);
    }
    for (std::size_t i = 0; i < input.attachments.size(); ++i) {
      auto& ca = bundle.attachments[i];
      ca.original_tokens = count_tokens(input.attachments[i].content);
      ca.compressed_tokens = count_tokens(ca.content);
      original += ca.original_tokens;
      compressed += ca.compressed_tokens;
      if (ca.dictionary) report.dictionaries.emplace(ca.name, *ca.dictionary);
    }
    report.original_tokens = original;
    report.compressed_tokens = compressed;
    if (compressed == 0) {
      report.ratio = original == 0 ? 1.0 : static_cast<double>(original);
    } else {
      report.ratio = static_cast<double>(original) / static_cast<double>(compressed);
    }
    report.model = config.model;
    report.est_original_cost = estimate_cost(original, config.model, config.prices);
    report.est_compressed_cost = estimate_cost(compressed, config.model, config.prices);
    report.est_savings = report.est_original_cost - report.est_compressed_cost;
    report.fidelity_warning = report.fidelity && report.fidelity->mean < config.fidelity_warning;
  });

  run_stage(kStageNames[6], timings, [&] {
    std::vector<const ScoredToken*> by_index(stream.size(), nullptr);
    for (const auto& s : scored) by_index[s.token_index] = &s;
    std::vector<std::optional<std::size_t>> phrase_of(stream.size());
    for (std::size_t p = 0; p < phrases.size(); ++p) {
      for (std::size_t i = phrases[p].begin; i < phrases[p].end; ++i) phrase_of[i] = p;
    }
    result.token_detail.reserve(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
      TokenDetail d;
      d.index = i;
      d.surface = std::string(stream.surface(i));
      d.kind = stream[i].kind;
      if (by_index[i] != nullptr) {
        d.s_stat = by_index[i]->s_stat;
        d.s_dyn = by_index[i]->s_dyn;
        d.s_combined = by_index[i]->s_combined;
      }
      d.phrase = phrase_of[i];
      d.kept = d.phrase ? phrase_kept[*d.phrase] : stream[i].is_whitespace();
      result.token_detail.push_back(std::move(d));
    }
  });

  run_stage(kStageNames[7], timings, [&] {
    bundle.compressed_prompt = exemplar_block + bundle.pruned_prompt + context_block;
  });

  report.stage_timings = std::move(timings);
  return result;
}

std::vector<GridCell> ablation_grid(const PipelineInput& input, std::span<const std::size_t> t_grid,
                                    std::span<const std::size_t> g_grid, const PipelineConfig& config) {
  if (t_grid.empty() || g_grid.empty()) throw Error(ErrorCode::InvalidArgument, "ablation grid: empty grid");
  const PipelineResources resources = load_resources(config);
  std::vector<std::future<GridCell>> jobs;
  for (std::size_t t : t_grid) {
    for (std::size_t g : g_grid) {
      jobs.push_back(std::async(std::launch::async, [&, t, g] {
        PipelineConfig cell = config;
        cell.ngram.top_k = t;
        cell.ngram.n = g;
        cell.ngram_enabled = true;
        return GridCell{t, g, run_pipeline(input, cell, &resources).report};
      }));
    }
  }
  std::vector<GridCell> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace promptpack
