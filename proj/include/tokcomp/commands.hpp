// Subcommand implementations behind the tokcomp CLI.
//
// Each command writes its outputs through a temporary file that is renamed
// into place on success and removed on failure, then writes a run manifest
// next to the primary output (`<output>.manifest.json`).

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokcomp/core_model.hpp"
#include "tokcomp/datagen.hpp"
#include "tokcomp/io.hpp"
#include "tokcomp/multimodal.hpp"
#include "tokcomp/parallel.hpp"
#include "tokcomp/report.hpp"
#include "tokcomp/trainer.hpp"

namespace tokcomp::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Bad command-line usage (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2 };

namespace detail {

using nlohmann::json;

/// Output file written to `<path>.tmp` and renamed on commit(); the
/// temporary is removed if the object dies uncommitted.
class StagedFile {
 public:
  explicit StagedFile(std::string path) : path_(std::move(path)), tmp_(path_ + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw DataError("cannot open output '" + path_ + "'");
  }
  StagedFile(const StagedFile&) = delete;
  StagedFile& operator=(const StagedFile&) = delete;
  ~StagedFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.close();
    if (!out_) throw DataError("failed writing '" + path_ + "'");
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline void write_json_file(const std::string& path, const json& j) {
  StagedFile f(path);
  f.stream() << j.dump(2) << '\n';
  f.commit();
}

inline std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

inline json manifest(const std::string& command, const PipelineConfig* cfg, json inputs,
                     json outputs, std::uint64_t seed, std::size_t threads, json stage_ms) {
  json m{{"tool", "tokcomp"},
         {"version", kToolVersion},
         {"command", command},
         {"inputs", std::move(inputs)},
         {"outputs", std::move(outputs)},
         {"seed", seed},
         {"threads", threads},
         {"stage_ms", std::move(stage_ms)}};
  if (cfg) m["config"] = io::config_to_json(*cfg);
  return m;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

// Config precedence: flag > file > default. When the file does not pin `d`
// it is taken from the corpus.
inline PipelineConfig load_config(const std::optional<std::string>& path,
                                  std::span<const Document> corpus) {
  json j = path ? io::read_json_file(*path) : json::object();
  if (!j.is_object()) throw ConfigError("config", "must be a JSON object");
  if (!j.contains("d") && !corpus.empty()) j["d"] = io::document_dimension(corpus.front());
  return io::config_from_json(j);
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct GenArgs {
  std::optional<std::string> spec_path;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_docs;
  std::optional<bool> multimodal;
  std::size_t threads = 1;
};

inline int run_gen(const GenArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  GenSpec spec;
  if (a.spec_path) spec = io::gen_spec_from_json(io::read_json_file(*a.spec_path));
  if (a.seed) spec.seed = *a.seed;
  if (a.n_docs) spec.n_docs = *a.n_docs;
  if (a.multimodal) spec.multimodal = *a.multimodal;
  validate_gen_spec(spec);
  const auto corpus = generate(spec, a.threads);
  detail::StagedFile out(a.output);
  io::write_corpus(out.stream(), corpus);
  out.commit();
  auto m = detail::manifest("gen", nullptr, {{"spec", a.spec_path.value_or("")}},
                            {{"corpus", a.output}}, spec.seed, a.threads,
                            {{"total", detail::elapsed_ms(start)}});
  m["generator"] = io::gen_spec_to_json(spec);
  detail::write_json_file(detail::manifest_path(a.output), m);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct CompressArgs {
  std::string input;
  std::optional<std::string> config_path;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<double> budget;  // rho override; switches to fixed-budget mode
  bool fixed_budget = false;
  std::optional<double> target_retention;
  bool no_propagation = false;
  bool no_coverage = false;
  bool no_alignment_constraint = false;
  bool with_scores = false;
  std::size_t threads = 1;
};

/// Effective config and options after applying flags and ablations.
inline std::pair<PipelineConfig, CompressOptions> resolve_compress(const CompressArgs& a,
                                                                    std::span<const Document> corpus) {
  PipelineConfig cfg = detail::load_config(a.config_path, corpus);
  CompressOptions opts;
  if (a.seed) cfg.seed = *a.seed;
  if (a.budget) cfg.rho = *a.budget;
  if (a.target_retention) cfg.target_retention = *a.target_retention;
  opts.fixed_budget = a.fixed_budget || a.budget.has_value();
  if (a.no_propagation) {
    opts.propagation = false;
    cfg.alpha = 0.0;
  }
  if (a.no_coverage) opts.coverage = false;
  if (a.no_alignment_constraint) {
    opts.alignment_constraint = false;
    cfg.delta_align = 1.0;
  }
  validate_config(cfg);
  return {cfg, opts};
}

inline int run_compress(const CompressArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  auto corpus = io::parse_corpus_file(a.input);
  const auto [cfg, opts] = resolve_compress(a, corpus);
  const double parse_ms = detail::elapsed_ms(start);

  std::vector<CompressionResult> results(corpus.size());
  std::vector<StageTimings> timings(corpus.size());
  parallel_for(corpus.size(), a.threads, [&](std::size_t i) {
    try {
      corpus[i] = validate_document(corpus[i], cfg);
    } catch (const DataError& e) {
      throw DataError("document '" + corpus[i].id + "': " + e.what());
    }
    results[i] = compress(corpus[i], cfg, opts, &timings[i]);
  });
  StageTimings total;
  for (const auto& t : timings) total += t;

  detail::StagedFile out(a.output);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    out.stream() << io::result_to_json(corpus[i], results[i], a.with_scores).dump() << '\n';
  out.commit();

  auto stage = io::timings_to_json(total);
  stage["parse"] = parse_ms;
  stage["total"] = detail::elapsed_ms(start);
  auto m = detail::manifest("compress", &cfg,
                            {{"corpus", a.input}, {"config", a.config_path.value_or("")}},
                            {{"results", a.output}}, cfg.seed, a.threads, std::move(stage));
  m["options"] = {{"propagation", opts.propagation},
                  {"coverage", opts.coverage},
                  {"alignment_constraint", opts.alignment_constraint},
                  {"fixed_budget", opts.fixed_budget},
                  {"with_scores", a.with_scores}};
  detail::write_json_file(detail::manifest_path(a.output), m);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string input;
  std::string compressed;
  std::string output;  // report JSON
  std::optional<std::string> config_path;
  std::optional<std::string> csv_path;
  std::optional<std::string> markdown_path;
  std::optional<std::string> timings_manifest;  // compress manifest to take stage timings from
  std::size_t bucket_width = 64;
};

/// Pairs documents with their results, checking ids and keep-set sanity.
inline std::vector<EvaluatedDoc> pair_results(const std::vector<Document>& corpus,
                                              std::vector<io::ResultLine>& lines) {
  if (lines.size() != corpus.size())
    throw DataError("compressed output has " + std::to_string(lines.size()) +
                    " documents, input has " + std::to_string(corpus.size()));
  std::vector<EvaluatedDoc> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& r = lines[i].result;
    if (lines[i].id != corpus[i].id)
      throw DataError("id mismatch at document " + std::to_string(i + 1) + ": expected '" +
                      corpus[i].id + "', got '" + lines[i].id + "'");
    if (r.kept.empty()) throw DataError("document '" + corpus[i].id + "' has an empty keep-set");
    for (std::size_t k = 0; k < r.kept.size(); ++k)
      if (r.kept[k] >= corpus[i].tokens.size() || (k > 0 && r.kept[k] <= r.kept[k - 1]))
        throw DataError("document '" + corpus[i].id + "' has an invalid keep-set");
    out.push_back({&corpus[i], r});
  }
  return out;
}

inline int run_evaluate(const EvaluateArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const auto corpus = io::parse_corpus_file(a.input);
  std::ifstream compressed(a.compressed);
  if (!compressed) throw DataError("cannot open compressed output '" + a.compressed + "'");
  auto lines = io::parse_results(compressed);
  const PipelineConfig cfg = detail::load_config(a.config_path, corpus);
  if (corpus.empty()) throw DataError("nothing to evaluate: input corpus is empty");
  const auto paired = pair_results(corpus, lines);

  std::optional<StageTimings> timings;
  if (a.timings_manifest) {
    const auto m = io::read_json_file(*a.timings_manifest);
    if (!m.contains("stage_ms")) throw DataError("manifest has no stage_ms");
    timings = io::timings_from_json(m["stage_ms"]);
  }
  const CorpusReport report = build_corpus_report(paired, cfg, "all", timings, a.bucket_width);

  detail::write_json_file(a.output, io::report_to_json(report));
  detail::json outputs{{"report", a.output}};
  if (a.csv_path) {
    detail::StagedFile f(*a.csv_path);
    io::write_report_csv(f.stream(), report);
    f.commit();
    outputs["csv"] = *a.csv_path;
  }
  if (a.markdown_path) {
    detail::StagedFile f(*a.markdown_path);
    io::write_report_markdown(f.stream(), report);
    f.commit();
    outputs["markdown"] = *a.markdown_path;
  }
  detail::write_json_file(
      detail::manifest_path(a.output),
      detail::manifest("evaluate", &cfg,
                       {{"corpus", a.input}, {"compressed", a.compressed},
                        {"config", a.config_path.value_or("")}},
                       std::move(outputs), cfg.seed, 1, {{"total", detail::elapsed_ms(start)}}));
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string input;
  std::optional<std::string> config_path;
  std::string output;  // best config JSON
  std::optional<std::string> history_path;
  std::optional<std::uint64_t> seed;
  std::size_t steps_per_bucket = 20;
  std::size_t buckets = 4;
  std::size_t threads = 1;
};

inline int run_train(const TrainArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  auto corpus = io::parse_corpus_file(a.input);
  if (corpus.empty()) throw DataError("train: empty corpus");
  PipelineConfig cfg = detail::load_config(a.config_path, corpus);
  if (a.seed) cfg.seed = *a.seed;
  validate_config(cfg);
  for (auto& doc : corpus) doc = validate_document(std::move(doc), cfg);

  TrainOptions opts;
  opts.steps_per_bucket = a.steps_per_bucket;
  opts.buckets = a.buckets;
  opts.threads = a.threads;
  const TrainResult result = train(corpus, cfg, opts);

  detail::write_json_file(a.output, io::config_to_json(result.best));
  detail::json outputs{{"config", a.output}};
  if (a.history_path) {
    detail::write_json_file(*a.history_path, io::train_result_to_json(result));
    outputs["history"] = *a.history_path;
  }
  auto m = detail::manifest("train", &cfg,
                            {{"corpus", a.input}, {"config", a.config_path.value_or("")}},
                            std::move(outputs), cfg.seed, a.threads,
                            {{"total", detail::elapsed_ms(start)}});
  m["initial_holdout_reward"] = result.initial_holdout_reward;
  m["final_holdout_reward"] = result.final_holdout_reward;
  detail::write_json_file(detail::manifest_path(a.output), m);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string input;   // report JSON from evaluate
  std::string output;  // rendered table file
  std::string format = "md";
};

inline int run_report(const ReportArgs& a) {
  if (a.format != "md" && a.format != "csv")
    throw UsageError("unknown report format '" + a.format + "' (expected md or csv)");
  const CorpusReport report = io::report_from_json(io::read_json_file(a.input));
  detail::StagedFile f(a.output);
  if (a.format == "md")
    io::write_report_markdown(f.stream(), report);
  else
    io::write_report_csv(f.stream(), report);
  f.commit();
  return kSuccess;
}

}  // namespace tokcomp::cli
