// Corpus-level aggregation: compression tables, error histograms and
// retention-versus-length curves.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tokcomp/compressor.hpp"
#include "tokcomp/core_model.hpp"
#include "tokcomp/metrics.hpp"

namespace tokcomp {

/// A document paired with its compression outcome.
struct EvaluatedDoc {
  const Document* doc = nullptr;
  CompressionResult result;
};

struct DatasetRow {
  std::string dataset;
  std::size_t doc_count = 0;
  long long baseline_tokens = 0;
  long long compressed_tokens = 0;
  double compression_percent = 0.0;
  double mean_retention = 0.0;
  std::optional<double> mean_alignment_before;
  std::optional<double> mean_alignment_after;
  // semantic loss, syntactic error, task inconsistency
  std::array<std::size_t, 3> error_histogram{0, 0, 0};
  std::optional<StageTimings> timings_ms;
  std::size_t peak_memory_estimate_bytes = 0;
};

struct CurvePoint {
  std::size_t bucket_start = 0;  // inclusive lower bound of the token-count bucket
  std::size_t doc_count = 0;
  double mean_retention = 0.0;
};

struct CorpusReport {
  std::vector<DatasetRow> rows;
  std::vector<CurvePoint> retention_curve;
  std::size_t curve_bucket_width = 64;
};

/// Working-set estimate for one document: embeddings, graph adjacency,
/// transition table and score vectors.
inline std::size_t memory_estimate_bytes(const Document& doc, const PipelineConfig& cfg) {
  const std::size_t nodes = doc.tokens.size() + (doc.visual_tokens ? doc.visual_tokens->size() : 0);
  const std::size_t d = doc.tokens.front().embedding.size();
  const std::size_t max_edges = nodes * 2 * (cfg.k_neighbors + cfg.k_cross);
  return nodes * d * sizeof(double) + 2 * max_edges * sizeof(Edge) + 3 * nodes * sizeof(double);
}

/// Aggregates every result into one row labeled `dataset_tag`.
inline DatasetRow build_report(std::span<const EvaluatedDoc> results, const PipelineConfig& cfg,
                               const std::string& dataset_tag,
                               std::optional<StageTimings> timings = std::nullopt) {
  if (results.empty()) throw DataError("build_report: no results");
  DatasetRow row;
  row.dataset = dataset_tag;
  row.doc_count = results.size();
  double retention_sum = 0.0;
  double align_before_sum = 0.0;
  double align_after_sum = 0.0;
  std::size_t aligned = 0;
  for (const auto& r : results) {
    row.baseline_tokens += static_cast<long long>(r.doc->tokens.size());
    row.compressed_tokens += static_cast<long long>(r.result.kept.size());
    retention_sum += r.result.retention;
    if (r.result.alignment_after) {
      align_before_sum += r.result.alignment_before.value_or(0.0);
      align_after_sum += *r.result.alignment_after;
      ++aligned;
    }
    const ErrorProfile p = classify_errors(*r.doc, r.result.kept, r.result.retention, cfg);
    row.error_histogram[0] += p.semantic_loss;
    row.error_histogram[1] += p.syntactic_error;
    row.error_histogram[2] += p.task_inconsistency;
    row.peak_memory_estimate_bytes =
        std::max(row.peak_memory_estimate_bytes, memory_estimate_bytes(*r.doc, cfg));
  }
  row.compression_percent = compression_percent(row.baseline_tokens, row.compressed_tokens);
  row.mean_retention = retention_sum / static_cast<double>(results.size());
  if (aligned > 0) {
    row.mean_alignment_before = align_before_sum / static_cast<double>(aligned);
    row.mean_alignment_after = align_after_sum / static_cast<double>(aligned);
  }
  row.timings_ms = timings;
  return row;
}

/// Mean retention per input-length bucket [k*width, (k+1)*width), ascending.
inline std::vector<CurvePoint> retention_curve(std::span<const EvaluatedDoc> results,
                                               std::size_t bucket_width = 64) {
  if (bucket_width == 0) throw DataError("retention_curve: bucket width must be positive");
  std::map<std::size_t, std::pair<std::size_t, double>> buckets;
  for (const auto& r : results) {
    auto& b = buckets[(r.doc->tokens.size() / bucket_width) * bucket_width];
    ++b.first;
    b.second += r.result.retention;
  }
  std::vector<CurvePoint> out;
  for (const auto& [start, acc] : buckets)
    out.push_back({start, acc.first, acc.second / static_cast<double>(acc.first)});
  return out;
}

/// One row per domain tag (sorted), followed by an overall row when the
/// corpus spans several domains, plus the retention curve.
inline CorpusReport build_corpus_report(std::span<const EvaluatedDoc> results,
                                        const PipelineConfig& cfg,
                                        const std::string& overall_tag = "all",
                                        std::optional<StageTimings> timings = std::nullopt,
                                        std::size_t bucket_width = 64) {
  if (results.empty()) throw DataError("build_report: no results");
  std::map<std::string, std::vector<EvaluatedDoc>> by_domain;
  for (const auto& r : results) by_domain[r.doc->domain_tag].push_back(r);
  CorpusReport report;
  report.curve_bucket_width = bucket_width;
  if (by_domain.size() == 1) {
    report.rows.push_back(build_report(results, cfg, by_domain.begin()->first, timings));
  } else {
    for (const auto& [tag, group] : by_domain) report.rows.push_back(build_report(group, cfg, tag));
    report.rows.push_back(build_report(results, cfg, overall_tag, timings));
  }
  report.retention_curve = retention_curve(results, bucket_width);
  return report;
}

}  // namespace tokcomp
