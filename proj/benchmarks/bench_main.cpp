#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "promptpack/abbreviation.hpp"
#include "promptpack/embedding.hpp"
#include "promptpack/exemplars.hpp"
#include "promptpack/lexicon.hpp"
#include "promptpack/pipeline.hpp"
#include "promptpack/quantization.hpp"
#include "promptpack/scoring.hpp"

using namespace promptpack;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(PROMPTPACK_FIXTURE_DIR) + "/" + name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// fixture text repeated until it reaches roughly `bytes`
std::string sized_text(std::size_t bytes) {
  const std::string base = fixture("filing.txt");
  std::string out;
  while (out.size() < bytes) out += base;
  return out;
}

}  // namespace

static void BM_Tokenize(benchmark::State& state) {
  const std::string text = sized_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Range(1 << 10, 1 << 18);

static void BM_ScoreStream(benchmark::State& state) {
  const auto res = load_resources(PipelineConfig{});
  const TokenStream stream = tokenize(sized_text(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(score_stream(stream, *res.frequency_model, *res.scorer, {}));
}
BENCHMARK(BM_ScoreStream)->Range(1 << 10, 1 << 16);

static void BM_Abbreviate(benchmark::State& state) {
  const std::string text = sized_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(abbreviate_text(text, {2, 100, 2}));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Abbreviate)->Range(1 << 10, 1 << 18);

static void BM_QuantizeUniform(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(100.0, 15.0);
  NumericColumn col{"x", {}, {}};
  for (std::int64_t i = 0; i < state.range(0); ++i) col.values.push_back(nd(rng));
  for (auto _ : state) benchmark::DoNotOptimize(quantize_uniform(col, 8));
}
BENCHMARK(BM_QuantizeUniform)->Range(1 << 8, 1 << 18);

static void BM_QuantizeKMeans(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(100.0, 15.0);
  NumericColumn col{"x", {}, {}};
  for (std::int64_t i = 0; i < state.range(0); ++i) col.values.push_back(nd(rng));
  for (auto _ : state) benchmark::DoNotOptimize(quantize_kmeans(col, 16, 42));
}
BENCHMARK(BM_QuantizeKMeans)->Range(1 << 8, 1 << 14);

static void BM_Silhouette(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<Vector> rows(n, Vector(16));
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& x : rows[i]) x = u(rng);
    labels[i] = i % 5;
  }
  const auto m = FeatureMatrix::from_rows(rows);
  for (auto _ : state) benchmark::DoNotOptimize(silhouette_score(m, labels));
}
BENCHMARK(BM_Silhouette)->Range(64, 2048);

static void BM_Pipeline(benchmark::State& state) {
  PipelineInput in;
  in.prompt = fixture("prompt.txt");
  in.attachments.push_back({Attachment::Kind::TextDocument, "filing.txt", fixture("filing.txt")});
  in.attachments.push_back({Attachment::Kind::Table, "segments.csv", fixture("segments.csv")});
  const PipelineConfig cfg;
  const auto res = load_resources(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(in, cfg, &res));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
