// Compression of paired text/visual documents.
//
// Importance is propagated over an extended graph holding both modalities;
// only text tokens are selectable and every visual token is kept. The
// controller additionally holds pooled text/visual alignment within
// delta_align of its uncompressed value.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tokcomp/compressor.hpp"
#include "tokcomp/core_model.hpp"
#include "tokcomp/pooling.hpp"
#include "tokcomp/scoring.hpp"
#include "tokcomp/token_graph.hpp"

namespace tokcomp {

/// Node layout: text tokens are 0..n-1, visual token j is node n + j.
struct ExtendedGraph {
  TokenGraph text;      // text-only subgraph, used for coverage
  TokenGraph combined;  // text + visual + cross-modal edges
  std::size_t text_count = 0;
};

inline ExtendedGraph build_extended_graph(const Document& doc, const PipelineConfig& cfg) {
  if (!doc.visual_tokens) throw DataError("document '" + doc.id + "' has no visual tokens");
  const std::size_t n = doc.tokens.size();
  const auto& visual = *doc.visual_tokens;
  ExtendedGraph eg;
  eg.text_count = n;
  eg.text = build_graph(doc, cfg);
  const TokenGraph vis = detail::build_graph_from(visual, cfg);

  eg.combined = TokenGraph(n + visual.size());
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : eg.text.neighbors(i))
      if (i < e.to) eg.combined.add_edge(i, e.to, e.weight);
  for (std::size_t j = 0; j < visual.size(); ++j)
    for (const auto& e : vis.neighbors(j))
      if (j < e.to) eg.combined.add_edge(n + j, n + e.to, e.weight);
  for (const auto& [key, w] : cross_modal_edges(doc, cfg))
    eg.combined.add_edge(key.first, n + key.second, w);
  eg.combined.finalize();
  return eg;
}

/// Attention base scores over text and visual tokens jointly, with the joint
/// mean embedding as context.
inline ImportanceVector joint_base_scores(const Document& doc, const PipelineConfig& cfg) {
  std::vector<const EmbeddedToken*> ptrs;
  for (const auto& t : doc.tokens) ptrs.push_back(&t);
  if (doc.visual_tokens)
    for (const auto& t : *doc.visual_tokens) ptrs.push_back(&t);
  return detail::attention_scores(ptrs, cfg.d);
}

inline CompressionResult compress_multimodal(const Document& doc, const PipelineConfig& cfg,
                                             const CompressOptions& opts = {},
                                             StageTimings* timings = nullptr) {
  detail::StageClock clock;
  StageTimings t;
  const ExtendedGraph eg = build_extended_graph(doc, cfg);
  t.graph_ms = clock.lap_ms();

  ImportanceVector scores = joint_base_scores(doc, cfg);
  if (opts.propagation) scores = propagate(scores, row_normalize(eg.combined), cfg).first;
  t.scoring_ms = clock.lap_ms();

  const std::size_t n = eg.text_count;
  const std::span<const double> all(scores.scores);
  const auto text_scores = all.first(n);
  const auto visual_scores = all.subspan(n);
  const Embedding visual_pool = pool_all(*doc.visual_tokens, visual_scores);
  const double before = alignment_score(pool_all(doc.tokens, text_scores), visual_pool);
  const double floor = before - cfg.delta_align;

  auto alignment_of = [&](std::span<const std::size_t> kept) {
    return alignment_score(pool(doc.tokens, kept, text_scores), visual_pool);
  };
  auto outcome = detail::run_controller(
      doc, text_scores, eg.text, cfg, opts, [&](std::span<const std::size_t> kept) {
        return !opts.alignment_constraint || alignment_of(kept) >= floor;
      });
  t.selection_ms = clock.lap_ms();
  if (timings) *timings += t;

  CompressionResult r;
  r.alignment_before = before;
  r.alignment_after = alignment_of(outcome.kept);
  r.kept = std::move(outcome.kept);
  r.scores = std::move(scores);
  r.retention = outcome.retention;
  r.controller_steps = outcome.steps;
  r.kept_ratio = static_cast<double>(r.kept.size()) / static_cast<double>(n);
  return r;
}

/// Dispatches on whether the document carries visual tokens.
inline CompressionResult compress(const Document& doc, const PipelineConfig& cfg,
                                  const CompressOptions& opts = {},
                                  StageTimings* timings = nullptr) {
  return doc.is_multimodal() ? compress_multimodal(doc, cfg, opts, timings)
                             : compress_document(doc, cfg, opts, timings);
}

}  // namespace tokcomp
