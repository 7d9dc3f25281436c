// Attention-style base importance and reinforcement propagation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tokcomp/core_model.hpp"
#include "tokcomp/token_graph.hpp"

namespace tokcomp {

struct PropagationTrace {
  std::size_t iterations = 0;
  double final_delta = 0.0;  // L1 change of the last iteration
  bool converged = false;
};

/// Numerically stable softmax (max-subtracted).
inline ImportanceVector softmax(std::span<const double> logits) {
  ImportanceVector out;
  out.scores.resize(logits.size());
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.scores[i] = std::exp(logits[i] - peak);
    total += out.scores[i];
  }
  for (double& s : out.scores) s /= total;
  return out;
}

namespace detail {

inline ImportanceVector attention_scores(std::span<const EmbeddedToken* const> tokens,
                                         std::size_t d) {
  std::vector<double> context(d, 0.0);
  for (const auto* tok : tokens)
    for (std::size_t k = 0; k < d; ++k) context[k] += tok->embedding[k];
  for (double& c : context) c /= static_cast<double>(tokens.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> logits(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i)
    logits[i] = dot(tokens[i]->embedding, context) * scale;
  return softmax(logits);
}

}  // namespace detail

/// softmax((e_i . c) / sqrt(d)) with c the mean token embedding.
inline ImportanceVector base_scores(const Document& doc, const PipelineConfig& cfg) {
  std::vector<const EmbeddedToken*> ptrs;
  ptrs.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) ptrs.push_back(&t);
  return detail::attention_scores(ptrs, cfg.d);
}

/// s <- (1 - alpha) b + alpha P^T s, starting from b, until the L1 change
/// drops below epsilon or max_iters is reached. `observer(iteration, s)` is
/// called after every iteration.
template <typename Observer>
std::pair<ImportanceVector, PropagationTrace> propagate(const ImportanceVector& b,
                                                        const TransitionTable& p,
                                                        const PipelineConfig& cfg,
                                                        Observer&& observer) {
  const std::size_t n = b.size();
  if (p.size() != n)
    throw DataError("dimension mismatch: scores have " + std::to_string(n) +
                    " entries, transition table has " + std::to_string(p.size()) + " rows");
  std::vector<double> s = b.scores;
  std::vector<double> next(n);
  PropagationTrace trace;
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& e : p.rows[i]) next[e.to] += e.weight * s[i];
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = (1.0 - cfg.alpha) * b.scores[i] + cfg.alpha * next[i];
      delta += std::abs(next[i] - s[i]);
    }
    s.swap(next);
    trace.iterations = it + 1;
    trace.final_delta = delta;
    observer(trace.iterations, std::as_const(s));
    if (delta < cfg.epsilon) {
      trace.converged = true;
      break;
    }
  }
  return {ImportanceVector{std::move(s)}, trace};
}

inline std::pair<ImportanceVector, PropagationTrace> propagate(const ImportanceVector& b,
                                                               const TransitionTable& p,
                                                               const PipelineConfig& cfg) {
  return propagate(b, p, cfg, [](std::size_t, const std::vector<double>&) {});
}

/// Normalized Shannon entropy H(s) / ln(n): 0 for one-hot, 1 for uniform.
inline double score_entropy(const ImportanceVector& s) {
  if (s.size() < 2) throw DataError("score_entropy needs at least two scores");
  double h = 0.0;
  for (double x : s.scores)
    if (x > 0.0) h -= x * std::log(x);
  return std::clamp(h / std::log(static_cast<double>(s.size())), 0.0, 1.0);
}

}  // namespace tokcomp
