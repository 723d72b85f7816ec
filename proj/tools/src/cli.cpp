#include "promptpack/cli.hpp"

#include <algorithm>
#include <charconv>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/hashing.hpp"
#include "promptpack/pipeline.hpp"
#include "promptpack/service.hpp"

namespace fs = std::filesystem;

namespace promptpack::cli {

namespace {

class CliError : public std::runtime_error {
 public:
  CliError(int status, const std::string& message) : std::runtime_error(message), status(status) {}
  int status;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kDataError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kDataError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ProviderFailure: return kProviderFailure;
    case ErrorCode::InvalidConfig:
    case ErrorCode::UnknownModel:
      return kUsage;
    default: return kDataError;
  }
}

bool is_table_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv";
}

// Options shared by compress and grid.
struct RunOptions {
  std::string prompt;
  std::vector<std::string> attach;
  std::string examples;
  std::string config;
  std::optional<double> budget;
  std::optional<std::size_t> max_tokens;
  std::optional<std::size_t> ngram;
  std::optional<std::size_t> topk;
  std::optional<int> bits;
  std::string quant;
  std::string exemplar_mode;
  bool no_ngram = false;
  bool append_dictionary = false;
  std::string model;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--prompt", o.prompt, "Prompt text file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--attach", o.attach, "Attachment file (.csv is treated as a table)")->check(CLI::ExistingFile);
  cmd->add_option("--examples", o.examples, "Exemplar pool, one example per line")->check(CLI::ExistingFile);
  cmd->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--budget", o.budget, "Keep ratio in (0, 1]");
  cmd->add_option("--max-tokens", o.max_tokens, "Absolute prompt token budget")->excludes("--budget");
  cmd->add_option("--ngram", o.ngram, "Words per abbreviated n-gram (G)");
  cmd->add_option("--topk", o.topk, "Dictionary size (T)");
  cmd->add_option("--bits", o.bits, "Uniform quantization bit width");
  cmd->add_option("--quant", o.quant, "Quantization mode")->check(CLI::IsMember({"off", "uniform", "kmeans"}));
  cmd->add_option("--exemplar-mode", o.exemplar_mode, "Exemplar selection")
      ->check(CLI::IsMember({"off", "random", "representative"}));
  cmd->add_flag("--no-ngram", o.no_ngram, "Disable abbreviation");
  cmd->add_flag("--append-dictionary", o.append_dictionary, "Append the dictionaries to the prompt as context");
  cmd->add_option("--model", o.model, "Model name in the price table");
}

PipelineConfig build_config(const RunOptions& o) {
  PipelineConfig c;
  if (!o.config.empty()) c.merge_json(read_file(o.config));
  c.apply_environment();
  nlohmann::json flags = nlohmann::json::object();
  if (o.budget) flags["budget"] = {{"mode", "ratio"}, {"value", *o.budget}};
  if (o.max_tokens) flags["budget"] = {{"mode", "maxTokens"}, {"value", *o.max_tokens}};
  if (o.ngram) flags["ngram"]["n"] = *o.ngram;
  if (o.topk) flags["ngram"]["topK"] = *o.topk;
  if (o.no_ngram) flags["ngram"]["enabled"] = false;
  if (o.bits) flags["quant"]["bits"] = *o.bits;
  if (!o.quant.empty()) flags["quant"]["mode"] = o.quant;
  if (!o.exemplar_mode.empty()) flags["exemplar"]["mode"] = o.exemplar_mode;
  if (o.append_dictionary) flags["appendDictionaryAsContext"] = true;
  if (!o.model.empty()) flags["model"] = o.model;
  c.merge_json(flags.dump());
  c.validate();
  return c;
}

PipelineInput build_input(const RunOptions& o) {
  PipelineInput in;
  in.prompt = read_file(o.prompt);
  for (const auto& a : o.attach) {
    const fs::path p(a);
    const auto kind = is_table_file(p) ? Attachment::Kind::Table : Attachment::Kind::TextDocument;
    const std::string name = p.filename().string();
    const bool dup = std::any_of(in.attachments.begin(), in.attachments.end(),
                                 [&](const Attachment& x) { return x.name == name; });
    if (dup) throw CliError(kUsage, "two attachments share the file name " + name);
    in.attachments.push_back({kind, name, read_file(p)});
  }
  if (!o.examples.empty()) {
    std::istringstream ss(read_file(o.examples));
    for (std::string line; std::getline(ss, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) in.exemplar_pool.push_back(line);
    }
  }
  return in;
}

int cmd_compress(const RunOptions& o, const std::string& out_dir, std::ostream& out) {
  const PipelineConfig config = build_config(o);
  const PipelineInput input = build_input(o);
  const PipelineResult result = run_pipeline(input, config);

  const fs::path dir(out_dir);
  fs::create_directories(dir / "attachments");
  write_file(dir / "prompt.txt", result.bundle.compressed_prompt);
  write_file(dir / "bundle.json", result.bundle_json());
  write_file(dir / "report.json", result.report.to_json());
  for (std::size_t i = 0; i < result.bundle.attachments.size(); ++i) {
    const CompressedAttachment& a = result.bundle.attachments[i];
    const fs::path base = dir / "attachments" / a.name;
    write_file(base, a.content);
    if (a.kind == Attachment::Kind::TextDocument) {
      // an empty dictionary still pins the content, so expand can verify it
      const AbbrevDictionary dict = a.dictionary ? *a.dictionary
                                                 : AbbrevDictionary(config.ngram, content_hash(a.content), {});
      write_file(base.string() + ".dict.json", dict.to_json());
    } else {
      write_file(base.string() + ".quant.json", columns_to_json(a.columns));
    }
  }

  const CompressionReport& r = result.report;
  nlohmann::json summary = {{"ratio", r.ratio},
                            {"originalTokens", r.original_tokens},
                            {"compressedTokens", r.compressed_tokens},
                            {"estSavings", r.est_savings},
                            {"model", r.model},
                            {"out", dir.string()}};
  if (r.fidelity) summary["fidelityMean"] = r.fidelity->mean;
  out << summary.dump() << '\n';
  return kOk;
}

int cmd_expand(const std::string& in_dir, const std::string& out_path, const std::string& only, std::ostream& out) {
  const fs::path att_dir = fs::path(in_dir) / "attachments";
  if (!fs::is_directory(att_dir)) throw CliError(kDataError, "no attachments/ directory in " + in_dir);

  // The bundle lists every attachment with its kind; fall back to scanning when absent.
  std::vector<std::pair<std::string, std::string>> items;  // name, kind
  const fs::path bundle_path = fs::path(in_dir) / "bundle.json";
  if (fs::exists(bundle_path)) {
    try {
      const auto j = nlohmann::json::parse(read_file(bundle_path));
      for (const auto& a : j.at("attachments")) items.emplace_back(a.at("name"), a.at("kind"));
    } catch (const nlohmann::json::exception& e) {
      throw CliError(kDataError, std::string("bundle.json: ") + e.what());
    }
  } else {
    for (const auto& e : fs::directory_iterator(att_dir)) {
      const std::string n = e.path().filename().string();
      if (n.ends_with(".dict.json") || n.ends_with(".quant.json")) continue;
      items.emplace_back(n, is_table_file(e.path()) ? "table" : "textDocument");
    }
    std::sort(items.begin(), items.end());
  }
  if (!only.empty()) {
    std::erase_if(items, [&](const auto& it) { return it.first != only; });
    if (items.empty()) throw CliError(kDataError, "no attachment named " + only);
  }
  if (items.empty()) throw CliError(kDataError, "bundle has no attachments");

  const bool single_file = items.size() == 1 && !fs::is_directory(out_path);
  nlohmann::json written = nlohmann::json::array();
  for (const auto& [name, kind] : items) {
    const fs::path base = att_dir / name;
    const std::string content = read_file(base);
    std::string restored;
    if (kind == "table") {
      const fs::path sidecar = base.string() + ".quant.json";
      if (!fs::exists(sidecar)) throw CliError(kDataError, "missing quantization sidecar for " + name);
      restored = reconstruct_table(content, columns_from_json(read_file(sidecar)));
    } else {
      const fs::path sidecar = base.string() + ".dict.json";
      if (!fs::exists(sidecar)) throw CliError(kDataError, "missing dictionary for " + name);
      restored = expand(AbbreviatedText{content, AbbrevDictionary::from_json(read_file(sidecar))});
    }
    const fs::path target = single_file ? fs::path(out_path) : fs::path(out_path) / name;
    write_file(target, restored);
    written.push_back(target.string());
  }
  out << nlohmann::json{{"written", std::move(written)}}.dump() << '\n';
  return kOk;
}

std::vector<std::size_t> parse_grid(const std::string& list, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size()) {
      throw CliError(kUsage, std::string("bad ") + what + " value '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CliError(kUsage, std::string(what) + " must not be empty");
  return out;
}

int cmd_grid(const RunOptions& o, const std::string& tgrid, const std::string& ggrid, std::ostream& out) {
  const PipelineConfig config = build_config(o);
  const PipelineInput input = build_input(o);
  const auto ts = parse_grid(tgrid, "--tgrid");
  const auto gs = parse_grid(ggrid, "--ggrid");
  for (const GridCell& cell : ablation_grid(input, ts, gs, config)) {
    nlohmann::json line = {{"T", cell.top_k}, {"G", cell.n},
                           {"report", nlohmann::json::parse(cell.report.to_json(false))}};
    out << line.dump() << '\n';
  }
  return kOk;
}

Service* g_running = nullptr;

int cmd_serve(int port, const std::string& static_dir, const std::string& config_file, std::ostream& err) {
  ServiceOptions opts;
  opts.port = port;
  if (!static_dir.empty()) opts.static_dir = static_dir;
  if (!config_file.empty()) opts.base_config.merge_json(read_file(config_file));
  opts.base_config.apply_environment();
  opts.base_config.validate();
  Service service(opts);
  const int bound = service.bind();
  if (bound < 0) throw CliError(kUsage, "cannot bind port " + std::to_string(port));
  err << "listening on " << opts.host << ':' << bound << std::endl;
  g_running = &service;
  std::signal(SIGINT, [](int) {
    if (g_running != nullptr) g_running->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_running != nullptr) g_running->stop();
  });
  service.listen();
  g_running = nullptr;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt and attachment compression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  RunOptions compress_opts;
  std::string out_dir = "bundle";
  auto* compress = app.add_subcommand("compress", "Compress a prompt and its attachments into a bundle directory");
  add_run_options(compress, compress_opts);
  compress->add_option("--out", out_dir, "Bundle output directory");

  std::string in_dir;
  std::string out_path;
  std::string only;
  auto* expand_cmd = app.add_subcommand("expand", "Restore attachments from a bundle directory");
  expand_cmd->add_option("--in", in_dir, "Bundle directory")->required();
  expand_cmd->add_option("--out", out_path, "Output file (single attachment) or directory")->required();
  expand_cmd->add_option("--attachment", only, "Restore only this attachment");

  RunOptions grid_opts;
  std::string tgrid = "2,3,4,5";
  std::string ggrid = "2,3,4";
  auto* grid = app.add_subcommand("grid", "Run the T x G ablation grid, one JSON report per line");
  add_run_options(grid, grid_opts);
  grid->add_option("--tgrid", tgrid, "Comma-separated dictionary sizes");
  grid->add_option("--ggrid", ggrid, "Comma-separated n-gram lengths");

  int port = port_from_environment();
  std::string static_dir;
  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port, "Listen port (default $PORT or 8080)");
  serve->add_option("--static", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
  serve->add_option("--config", serve_config, "JSON config file")->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (compress->parsed()) return cmd_compress(compress_opts, out_dir, out);
    if (expand_cmd->parsed()) return cmd_expand(in_dir, out_path, only, out);
    if (grid->parsed()) return cmd_grid(grid_opts, tgrid, ggrid, out);
    if (serve->parsed()) return cmd_serve(port, static_dir, serve_config, err);
  } catch (const CliError& e) {
    err << "error: " << e.what() << '\n';
    return e.status;
  } catch (const StageFailure& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return status_for(e.code());
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return status_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace promptpack::cli
