// Per-document quality metrics: semantic retention and error categories.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "tokcomp/core_model.hpp"
#include "tokcomp/pooling.hpp"

namespace tokcomp {

struct ErrorProfile {
  bool semantic_loss = false;
  bool syntactic_error = false;
  bool task_inconsistency = false;
  bool operator==(const ErrorProfile&) const = default;
};

/// max(0, cos(pool(kept), pool(all))) under the given per-token weights.
/// Returns exactly 1 when every token is kept. A zero pool yields 0.
inline double retention_score(const Document& doc, std::span<const std::size_t> kept,
                              std::span<const double> weights) {
  if (kept.empty()) throw DataError("retention of an empty keep-set");
  if (kept.size() == doc.tokens.size()) return 1.0;
  double kept_mass = 0.0;
  for (std::size_t i : kept) kept_mass += weights[i];
  if (kept_mass == 0.0) return 0.0;
  const Embedding kept_pool = pool(doc.tokens, kept, weights);
  const Embedding full_pool = pool_all(doc.tokens, weights);
  const auto c = cosine(kept_pool, full_pool);
  if (!c) return 0.0;
  return std::clamp(*c, 0.0, 1.0);
}

inline double retention_score(const Document& doc, std::span<const std::size_t> kept,
                              const ImportanceVector& scores) {
  return retention_score(doc, kept, std::span<const double>(scores.scores));
}

/// Longest run of consecutive dropped positions.
inline std::size_t longest_dropped_run(std::size_t n, std::span<const std::size_t> kept) {
  std::size_t longest = 0;
  std::size_t prev_end = 0;  // first position after the previous kept token
  for (std::size_t k : kept) {
    longest = std::max(longest, k - prev_end);
    prev_end = k + 1;
  }
  return std::max(longest, n - prev_end);
}

/// semantic_loss: retention < theta_sem; syntactic_error: a dropped run longer
/// than g_max; task_inconsistency: a "critical" token was dropped.
inline ErrorProfile classify_errors(const Document& doc, std::span<const std::size_t> kept,
                                    double retention, const PipelineConfig& cfg) {
  ErrorProfile p;
  p.semantic_loss = retention < cfg.theta_sem;
  p.syntactic_error = longest_dropped_run(doc.tokens.size(), kept) > cfg.g_max;
  std::vector<bool> is_kept(doc.tokens.size(), false);
  for (std::size_t k : kept) is_kept[k] = true;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i)
    if (!is_kept[i] && doc.tokens[i].is_critical()) {
      p.task_inconsistency = true;
      break;
    }
  return p;
}

}  // namespace tokcomp
