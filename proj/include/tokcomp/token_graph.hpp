// Sparse token-interdependency graphs.
//
// Edge weights blend clamped cosine similarity with an exponential positional
// kernel. Each node keeps its k strongest candidates (ties toward the smaller
// index) and the graph is the symmetric union of those choices.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "tokcomp/core_model.hpp"

namespace tokcomp {

inline double clamped_cosine(std::span<const double> a, std::span<const double> b) {
  return std::clamp(dot(a, b), 0.0, 1.0);
}

/// w = lambda_sem * max(0, e_i . e_j) + (1 - lambda_sem) * exp(-|i - j| / tau)
inline double edge_weight(std::span<const double> e_i, std::span<const double> e_j,
                          std::size_t i, std::size_t j, const PipelineConfig& cfg) {
  if (i == j) throw Error("self-edge requested");
  const double gap = static_cast<double>(i > j ? i - j : j - i);
  const double w = cfg.lambda_sem * clamped_cosine(e_i, e_j) +
                   (1.0 - cfg.lambda_sem) * std::exp(-gap / cfg.tau);
  return std::clamp(w, 0.0, 1.0);
}

namespace detail {

// Indices of the k largest values (ties toward the smaller index), skipping
// zero weights and `self`.
inline std::vector<std::size_t> top_k_indices(const std::vector<double>& w, std::size_t k,
                                              std::size_t self) {
  std::vector<std::size_t> idx;
  idx.reserve(w.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    if (j != self && w[j] > 0.0) idx.push_back(j);
  auto better = [&](std::size_t a, std::size_t b) {
    return w[a] != w[b] ? w[a] > w[b] : a < b;
  };
  if (idx.size() > k) {
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      better);
    idx.resize(k);
  } else {
    std::sort(idx.begin(), idx.end(), better);
  }
  return idx;
}

inline TokenGraph build_graph_from(std::span<const EmbeddedToken> tokens,
                                   const PipelineConfig& cfg) {
  const std::size_t n = tokens.size();
  TokenGraph g(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      row[j] = (i == j) ? 0.0 : edge_weight(tokens[i].embedding, tokens[j].embedding, i, j, cfg);
    for (std::size_t j : top_k_indices(row, cfg.k_neighbors, i)) g.add_edge(i, j, row[j]);
  }
  g.finalize();
  return g;
}

}  // namespace detail

/// Top-k symmetrized graph over the document's text tokens.
inline TokenGraph build_graph(const Document& doc, const PipelineConfig& cfg) {
  return detail::build_graph_from(doc.tokens, cfg);
}

/// Row-stochastic transition table in sparse row form.
struct TransitionTable {
  std::vector<std::vector<Edge>> rows;

  std::size_t size() const { return rows.size(); }
};

/// P_ij = w_ij / sum_k w_ik; nodes without weighted degree get P_ii = 1.
inline TransitionTable row_normalize(const TokenGraph& g) {
  TransitionTable p;
  p.rows.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto nb = g.neighbors(i);
    double total = 0.0;
    for (const auto& e : nb) total += e.weight;
    if (total <= 0.0) {
      p.rows[i].push_back({i, 1.0});
      continue;
    }
    p.rows[i].reserve(nb.size());
    for (const auto& e : nb) p.rows[i].push_back({e.to, e.weight / total});
  }
  return p;
}

/// Sparse (text index, visual index) -> weight map.
using CrossModalMap = std::map<std::pair<std::size_t, std::size_t>, double>;

/// For each text token, its k_cross most similar visual tokens by clamped
/// cosine. Zero-weight pairs are not stored.
inline CrossModalMap cross_modal_edges(const Document& doc, const PipelineConfig& cfg) {
  if (!doc.visual_tokens) throw DataError("document '" + doc.id + "' has no visual tokens");
  const auto& visual = *doc.visual_tokens;
  CrossModalMap out;
  std::vector<double> row(visual.size());
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    for (std::size_t j = 0; j < visual.size(); ++j)
      row[j] = clamped_cosine(doc.tokens[i].embedding, visual[j].embedding);
    for (std::size_t j : detail::top_k_indices(row, cfg.k_cross, visual.size()))
      out.emplace(std::pair{i, j}, row[j]);
  }
  return out;
}

}  // namespace tokcomp
