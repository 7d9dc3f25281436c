// JSON and JSONL serialization for documents, configs, compression results,
// reports, training checkpoints and run manifests.
//
// Documents are one JSON object per line:
//   {"id": str, "domain": str, "tokens": [{"t": str, "e": [num...], "f": [str...]}],
//    "visual": [...same token shape...]}   // "visual" optional
// Token positions are implicit in array order. Numbers are written in
// shortest round-trip form so outputs are byte-reproducible.

#pragma once

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokcomp/compressor.hpp"
#include "tokcomp/core_model.hpp"
#include "tokcomp/datagen.hpp"
#include "tokcomp/report.hpp"
#include "tokcomp/trainer.hpp"

namespace tokcomp::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Documents

inline json token_to_json(const EmbeddedToken& t) {
  json f = json::array();
  for (const auto& flag : t.flags) f.push_back(flag);
  return json{{"t", t.text}, {"e", t.embedding}, {"f", std::move(f)}};
}

inline json document_to_json(const Document& doc) {
  json tokens = json::array();
  for (const auto& t : doc.tokens) tokens.push_back(token_to_json(t));
  json j{{"id", doc.id}, {"domain", doc.domain_tag}, {"tokens", std::move(tokens)}};
  if (doc.visual_tokens) {
    json visual = json::array();
    for (const auto& t : *doc.visual_tokens) visual.push_back(token_to_json(t));
    j["visual"] = std::move(visual);
  }
  return j;
}

namespace detail {

inline std::vector<EmbeddedToken> tokens_from_json(const json& arr, const char* key) {
  if (!arr.is_array()) throw DataError(std::string("\"") + key + "\" must be an array");
  std::vector<EmbeddedToken> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& tj = arr[i];
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    if (!tj.is_object()) throw DataError(where + " must be an object");
    if (!tj.contains("e") || !tj["e"].is_array()) throw DataError(where + " is missing \"e\"");
    EmbeddedToken tok;
    tok.position = i;
    if (tj.contains("t")) {
      if (!tj["t"].is_string()) throw DataError(where + ".t must be a string");
      tok.text = tj["t"].get<std::string>();
    }
    for (const auto& x : tj["e"]) {
      if (!x.is_number()) throw DataError(where + ".e must contain only numbers");
      tok.embedding.push_back(x.get<double>());
    }
    if (tj.contains("f")) {
      if (!tj["f"].is_array()) throw DataError(where + ".f must be an array");
      for (const auto& flag : tj["f"]) {
        if (!flag.is_string()) throw DataError(where + ".f must contain only strings");
        tok.flags.insert(flag.get<std::string>());
      }
    }
    out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace detail

/// Schema check only; numeric invariants are enforced by validate_document.
inline Document document_from_json(const json& j) {
  if (!j.is_object()) throw DataError("document must be a JSON object");
  if (!j.contains("id") || !j["id"].is_string()) throw DataError("missing string field \"id\"");
  if (!j.contains("tokens")) throw DataError("missing field \"tokens\"");
  Document doc;
  doc.id = j["id"].get<std::string>();
  if (j.contains("domain")) {
    if (!j["domain"].is_string()) throw DataError("\"domain\" must be a string");
    doc.domain_tag = j["domain"].get<std::string>();
  }
  doc.tokens = detail::tokens_from_json(j["tokens"], "tokens");
  if (doc.tokens.empty()) throw DataError("empty token list");
  if (j.contains("visual") && !j["visual"].is_null()) {
    doc.visual_tokens = detail::tokens_from_json(j["visual"], "visual");
    if (doc.visual_tokens->empty()) throw DataError("empty visual token list");
  }
  return doc;
}

inline std::size_t document_dimension(const Document& doc) {
  return doc.tokens.front().embedding.size();
}

/// Parses a JSONL corpus. Blank lines are skipped; every error carries the
/// 1-based line number. All embeddings in the corpus must share one dimension.
inline std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> corpus;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    try {
      Document doc = document_from_json(j);
      auto check = [&](const std::vector<EmbeddedToken>& toks) {
        for (const auto& t : toks) {
          if (dim == 0) dim = t.embedding.size();
          if (t.embedding.size() != dim)
            throw DataError("dimension mismatch: expected " + std::to_string(dim) + ", got " +
                            std::to_string(t.embedding.size()));
        }
      };
      check(doc.tokens);
      if (doc.visual_tokens) check(*doc.visual_tokens);
      corpus.push_back(std::move(doc));
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
  }
  return corpus;
}

inline std::vector<Document> parse_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return parse_corpus(in);
}

inline void write_corpus(std::ostream& out, std::span<const Document> corpus) {
  for (const auto& doc : corpus) out << document_to_json(doc).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Pipeline configuration

inline json config_to_json(const PipelineConfig& c) {
  return json{{"d", c.d},
              {"lambda_sem", c.lambda_sem},
              {"tau", c.tau},
              {"k_neighbors", c.k_neighbors},
              {"alpha", c.alpha},
              {"epsilon", c.epsilon},
              {"max_iters", c.max_iters},
              {"rho", c.rho},
              {"rho_min", c.rho_min},
              {"theta_cov", c.theta_cov},
              {"target_retention", c.target_retention},
              {"k_cross", c.k_cross},
              {"delta_align", c.delta_align},
              {"theta_sem", c.theta_sem},
              {"g_max", c.g_max},
              {"w_c", c.w_c},
              {"w_r", c.w_r},
              {"mu", c.mu},
              {"seed", c.seed}};
}

namespace detail {

inline double read_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "must be a number");
  return v.get<double>();
}

inline std::uint64_t read_count(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key, "must be an integer");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto x = v.get<std::int64_t>();
  if (x < 0) throw ConfigError(key, "must be nonnegative");
  return static_cast<std::uint64_t>(x);
}

}  // namespace detail

/// Applies the keys of a flat config object on top of `base`, then
/// validates. Unknown keys are rejected.
inline PipelineConfig config_from_json(const json& j, PipelineConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config", "must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    using detail::read_count;
    using detail::read_real;
    if (key == "d") base.d = read_count(v, key);
    else if (key == "lambda_sem") base.lambda_sem = read_real(v, key);
    else if (key == "tau") base.tau = read_real(v, key);
    else if (key == "k_neighbors") base.k_neighbors = read_count(v, key);
    else if (key == "alpha") base.alpha = read_real(v, key);
    else if (key == "epsilon") base.epsilon = read_real(v, key);
    else if (key == "max_iters") base.max_iters = read_count(v, key);
    else if (key == "rho") base.rho = read_real(v, key);
    else if (key == "rho_min") base.rho_min = read_real(v, key);
    else if (key == "theta_cov") base.theta_cov = read_real(v, key);
    else if (key == "target_retention") base.target_retention = read_real(v, key);
    else if (key == "k_cross") base.k_cross = read_count(v, key);
    else if (key == "delta_align") base.delta_align = read_real(v, key);
    else if (key == "theta_sem") base.theta_sem = read_real(v, key);
    else if (key == "g_max") base.g_max = read_count(v, key);
    else if (key == "w_c") base.w_c = read_real(v, key);
    else if (key == "w_r") base.w_r = read_real(v, key);
    else if (key == "mu") base.mu = read_real(v, key);
    else if (key == "seed") base.seed = read_count(v, key);
    else throw ConfigError(key, "unknown configuration field");
  }
  validate_config(base);
  return base;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("malformed JSON in '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Generator specs

inline json gen_spec_to_json(const GenSpec& s) {
  return json{{"n_docs", s.n_docs},
              {"tokens_min", s.tokens_min},
              {"tokens_max", s.tokens_max},
              {"d", s.d},
              {"n_topics", s.n_topics},
              {"topics_per_doc", s.topics_per_doc},
              {"redundancy", s.redundancy},
              {"noise_sigma", s.noise_sigma},
              {"critical_frac", s.critical_frac},
              {"multimodal", s.multimodal},
              {"visual_tokens_per_doc", s.visual_tokens_per_doc},
              {"seed", s.seed},
              {"domains", s.domains}};
}

inline GenSpec gen_spec_from_json(const json& j, GenSpec base = {}) {
  if (!j.is_object()) throw ConfigError("spec", "must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    using detail::read_count;
    using detail::read_real;
    if (key == "n_docs") base.n_docs = read_count(v, key);
    else if (key == "tokens_min") base.tokens_min = read_count(v, key);
    else if (key == "tokens_max") base.tokens_max = read_count(v, key);
    else if (key == "d") base.d = read_count(v, key);
    else if (key == "n_topics") base.n_topics = read_count(v, key);
    else if (key == "topics_per_doc") base.topics_per_doc = read_count(v, key);
    else if (key == "redundancy") base.redundancy = read_real(v, key);
    else if (key == "noise_sigma") base.noise_sigma = read_real(v, key);
    else if (key == "critical_frac") base.critical_frac = read_real(v, key);
    else if (key == "multimodal") {
      if (!v.is_boolean()) throw ConfigError(key, "must be a boolean");
      base.multimodal = v.get<bool>();
    } else if (key == "visual_tokens_per_doc") base.visual_tokens_per_doc = read_count(v, key);
    else if (key == "seed") base.seed = read_count(v, key);
    else if (key == "domains") {
      if (!v.is_array()) throw ConfigError(key, "must be an array of strings");
      base.domains.clear();
      for (const auto& s : v) {
        if (!s.is_string()) throw ConfigError(key, "must be an array of strings");
        base.domains.push_back(s.get<std::string>());
      }
    } else throw ConfigError(key, "unknown generator field");
  }
  validate_gen_spec(base);
  return base;
}

// ---------------------------------------------------------------------------
// Compression results (one JSON line per document)

inline json result_to_json(const Document& doc, const CompressionResult& r, bool with_scores) {
  json j{{"id", doc.id},
         {"kept", r.kept},
         {"kept_ratio", r.kept_ratio},
         {"retention", r.retention},
         {"controller_steps", r.controller_steps}};
  if (r.alignment_before) j["alignment_before"] = *r.alignment_before;
  if (r.alignment_after) j["alignment_after"] = *r.alignment_after;
  if (with_scores) j["scores"] = r.scores.scores;
  return j;
}

struct ResultLine {
  std::string id;
  CompressionResult result;
};

inline ResultLine result_from_json(const json& j) {
  if (!j.is_object()) throw DataError("result must be a JSON object");
  for (const char* key : {"id", "kept", "kept_ratio", "retention", "controller_steps"})
    if (!j.contains(key)) throw DataError(std::string("missing field \"") + key + "\"");
  ResultLine line;
  try {
    line.id = j["id"].get<std::string>();
    line.result.kept = j["kept"].get<std::vector<std::size_t>>();
    line.result.kept_ratio = j["kept_ratio"].get<double>();
    line.result.retention = j["retention"].get<double>();
    line.result.controller_steps = j["controller_steps"].get<std::size_t>();
    if (j.contains("alignment_before")) line.result.alignment_before = j["alignment_before"].get<double>();
    if (j.contains("alignment_after")) line.result.alignment_after = j["alignment_after"].get<double>();
    if (j.contains("scores")) line.result.scores.scores = j["scores"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad result field: ") + e.what());
  }
  return line;
}

inline std::vector<ResultLine> parse_results(std::istream& in) {
  std::vector<ResultLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(result_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline json timings_to_json(const StageTimings& t) {
  return json{{"graph", t.graph_ms}, {"scoring", t.scoring_ms}, {"selection", t.selection_ms}};
}

inline StageTimings timings_from_json(const json& j) {
  StageTimings t;
  t.graph_ms = j.value("graph", 0.0);
  t.scoring_ms = j.value("scoring", 0.0);
  t.selection_ms = j.value("selection", 0.0);
  return t;
}

inline json row_to_json(const DatasetRow& r) {
  json j{{"dataset", r.dataset},
         {"doc_count", r.doc_count},
         {"baseline_tokens", r.baseline_tokens},
         {"compressed_tokens", r.compressed_tokens},
         {"compression_percent", r.compression_percent},
         {"mean_retention", r.mean_retention},
         {"errors",
          {{"semantic_loss", r.error_histogram[0]},
           {"syntactic_error", r.error_histogram[1]},
           {"task_inconsistency", r.error_histogram[2]}}},
         {"peak_memory_estimate_bytes", r.peak_memory_estimate_bytes}};
  j["mean_alignment_before"] = r.mean_alignment_before ? json(*r.mean_alignment_before) : json();
  j["mean_alignment_after"] = r.mean_alignment_after ? json(*r.mean_alignment_after) : json();
  j["timings_ms"] = r.timings_ms ? timings_to_json(*r.timings_ms) : json();
  return j;
}

inline DatasetRow row_from_json(const json& j) {
  DatasetRow r;
  try {
    r.dataset = j.at("dataset").get<std::string>();
    r.doc_count = j.at("doc_count").get<std::size_t>();
    r.baseline_tokens = j.at("baseline_tokens").get<long long>();
    r.compressed_tokens = j.at("compressed_tokens").get<long long>();
    r.compression_percent = j.at("compression_percent").get<double>();
    r.mean_retention = j.at("mean_retention").get<double>();
    const auto& e = j.at("errors");
    r.error_histogram = {e.at("semantic_loss").get<std::size_t>(),
                         e.at("syntactic_error").get<std::size_t>(),
                         e.at("task_inconsistency").get<std::size_t>()};
    r.peak_memory_estimate_bytes = j.at("peak_memory_estimate_bytes").get<std::size_t>();
    if (j.contains("mean_alignment_before") && !j["mean_alignment_before"].is_null())
      r.mean_alignment_before = j["mean_alignment_before"].get<double>();
    if (j.contains("mean_alignment_after") && !j["mean_alignment_after"].is_null())
      r.mean_alignment_after = j["mean_alignment_after"].get<double>();
    if (j.contains("timings_ms") && !j["timings_ms"].is_null())
      r.timings_ms = timings_from_json(j["timings_ms"]);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad report row: ") + e.what());
  }
  return r;
}

inline json report_to_json(const CorpusReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(row_to_json(r));
  json curve = json::array();
  for (const auto& p : report.retention_curve)
    curve.push_back({{"bucket_start", p.bucket_start},
                     {"doc_count", p.doc_count},
                     {"mean_retention", p.mean_retention}});
  return json{{"rows", std::move(rows)},
              {"retention_curve", {{"bucket_width", report.curve_bucket_width},
                                   {"points", std::move(curve)}}},
              {"notes",
               {{"retention", "importance-weighted pooled cosine; stands in for downstream accuracy"},
                {"memory", "estimate"}}}};
}

inline CorpusReport report_from_json(const json& j) {
  CorpusReport report;
  try {
    for (const auto& r : j.at("rows")) report.rows.push_back(row_from_json(r));
    const auto& curve = j.at("retention_curve");
    report.curve_bucket_width = curve.at("bucket_width").get<std::size_t>();
    for (const auto& p : curve.at("points"))
      report.retention_curve.push_back({p.at("bucket_start").get<std::size_t>(),
                                        p.at("doc_count").get<std::size_t>(),
                                        p.at("mean_retention").get<double>()});
  } catch (const json::exception& e) {
    throw DataError(std::string("bad report: ") + e.what());
  }
  return report;
}

namespace detail {

// Same shortest round-trip form the JSON writer uses, so CSV and JSON agree.
inline std::string number(double x) { return json(x).dump(); }

inline std::string optional_number(const std::optional<double>& x) {
  return x ? number(*x) : std::string();
}

}  // namespace detail

inline const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> cols{
      "dataset",          "doc_count",          "baseline_tokens",       "compressed_tokens",
      "compression_percent", "mean_retention",  "mean_alignment_before", "mean_alignment_after",
      "semantic_loss",    "syntactic_error",    "task_inconsistency",    "peak_memory_estimate_bytes",
      "graph_ms",         "scoring_ms",         "selection_ms"};
  return cols;
}

/// One CSV row per dataset row, carrying the same values as the JSON form.
inline void write_report_csv(std::ostream& out, const CorpusReport& report) {
  const auto& cols = report_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : report.rows) {
    using detail::number;
    using detail::optional_number;
    out << r.dataset << ',' << r.doc_count << ',' << r.baseline_tokens << ','
        << r.compressed_tokens << ',' << number(r.compression_percent) << ','
        << number(r.mean_retention) << ',' << optional_number(r.mean_alignment_before) << ','
        << optional_number(r.mean_alignment_after) << ',' << r.error_histogram[0] << ','
        << r.error_histogram[1] << ',' << r.error_histogram[2] << ','
        << r.peak_memory_estimate_bytes << ',';
    if (r.timings_ms)
      out << number(r.timings_ms->graph_ms) << ',' << number(r.timings_ms->scoring_ms) << ','
          << number(r.timings_ms->selection_ms);
    else
      out << ",,";
    out << '\n';
  }
}

/// Markdown tables: compression efficiency, resource usage, multimodal
/// alignment, retention by input length and error frequencies.
inline void write_report_markdown(std::ostream& out, const CorpusReport& report) {
  auto fixed = [](double x, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << x;
    return s.str();
  };
  out << "## Token compression efficiency\n\n"
      << "| Dataset | Docs | Baseline | Compressed | Compression (%) | Mean retention |\n"
      << "|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : report.rows)
    out << "| " << r.dataset << " | " << r.doc_count << " | " << r.baseline_tokens << " | "
        << r.compressed_tokens << " | " << fixed(r.compression_percent, 1) << " | "
        << fixed(r.mean_retention, 4) << " |\n";

  out << "\n## Resource usage\n\n"
      << "| Dataset | Peak memory estimate (bytes) | Graph (ms) | Scoring (ms) | Selection (ms) |\n"
      << "|---|---:|---:|---:|---:|\n";
  for (const auto& r : report.rows) {
    out << "| " << r.dataset << " | " << r.peak_memory_estimate_bytes << " | ";
    if (r.timings_ms)
      out << fixed(r.timings_ms->graph_ms, 2) << " | " << fixed(r.timings_ms->scoring_ms, 2)
          << " | " << fixed(r.timings_ms->selection_ms, 2) << " |\n";
    else
      out << "- | - | - |\n";
  }

  bool any_alignment = false;
  for (const auto& r : report.rows) any_alignment |= r.mean_alignment_after.has_value();
  if (any_alignment) {
    out << "\n## Multimodal semantic alignment\n\n"
        << "| Dataset | Before compression | After compression |\n|---|---:|---:|\n";
    for (const auto& r : report.rows)
      if (r.mean_alignment_after)
        out << "| " << r.dataset << " | " << fixed(*r.mean_alignment_before, 4) << " | "
            << fixed(*r.mean_alignment_after, 4) << " |\n";
  }

  out << "\n## Semantic retention by input token count\n\n"
      << "| Tokens | Docs | Mean retention |\n|---|---:|---:|\n";
  for (const auto& p : report.retention_curve)
    out << "| " << p.bucket_start << "-" << p.bucket_start + report.curve_bucket_width - 1 << " | "
        << p.doc_count << " | " << fixed(p.mean_retention, 4) << " |\n";

  out << "\n## Error frequency\n\n"
      << "| Dataset | Semantic loss | Syntactic error | Task inconsistency |\n|---|---:|---:|---:|\n";
  for (const auto& r : report.rows)
    out << "| " << r.dataset << " | " << r.error_histogram[0] << " | " << r.error_histogram[1]
        << " | " << r.error_histogram[2] << " |\n";
}

// ---------------------------------------------------------------------------
// Training checkpoints

inline json checkpoint_to_json(const Checkpoint& c) {
  return json{{"config", config_to_json(c.config)},
              {"mean_reward", c.mean_reward},
              {"bucket_index", c.bucket_index},
              {"accepted_moves", c.accepted_moves}};
}

inline json train_result_to_json(const TrainResult& r) {
  json history = json::array();
  for (const auto& c : r.history) history.push_back(checkpoint_to_json(c));
  json accepted = json::array();
  for (const auto& m : r.accepted)
    accepted.push_back({{"bucket_index", m.bucket_index},
                        {"step", m.step},
                        {"parameter", m.parameter},
                        {"mean_reward", m.mean_reward}});
  return json{{"best", config_to_json(r.best)},
              {"history", std::move(history)},
              {"accepted", std::move(accepted)},
              {"initial_holdout_reward", r.initial_holdout_reward},
              {"final_holdout_reward", r.final_holdout_reward},
              {"notes", "retention is used as the downstream-accuracy proxy"}};
}

}  // namespace tokcomp::io
