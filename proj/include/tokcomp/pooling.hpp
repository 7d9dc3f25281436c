// Importance-weighted pooling and cross-modal alignment.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "tokcomp/core_model.hpp"

namespace tokcomp {

/// sum_{i in subset} w_i e_i / sum_{i in subset} w_i, where `weights` is
/// indexed by token index. The result is not re-normalized.
inline Embedding pool(std::span<const EmbeddedToken> tokens, std::span<const std::size_t> subset,
                      std::span<const double> weights) {
  if (subset.empty()) throw DataError("pool over an empty subset");
  const std::size_t d = tokens[subset.front()].embedding.size();
  Embedding acc(d, 0.0);
  double total = 0.0;
  for (std::size_t i : subset) {
    const double w = weights[i];
    total += w;
    const auto& e = tokens[i].embedding;
    for (std::size_t k = 0; k < d; ++k) acc[k] += w * e[k];
  }
  if (total == 0.0) throw DataError("pool weights are all zero");
  for (double& x : acc) x /= total;
  return acc;
}

/// Pool over every token.
inline Embedding pool_all(std::span<const EmbeddedToken> tokens, std::span<const double> weights) {
  std::vector<std::size_t> all(tokens.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return pool(tokens, all, weights);
}

/// max(0, cos(text_pool, visual_pool)).
inline double alignment_score(std::span<const double> text_pool,
                              std::span<const double> visual_pool) {
  const auto c = cosine(text_pool, visual_pool);
  if (!c) throw DataError("alignment of a zero-vector pool");
  return std::clamp(*c, 0.0, 1.0);
}

}  // namespace tokcomp
