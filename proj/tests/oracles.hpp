// Test-only reference implementations. Everything here is written
// independently of the library code paths it is used to check: dense linear
// algebra instead of iteration, all-pairs scans instead of top-k selection,
// long double arithmetic instead of double.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tokcomp/core_model.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<long double>>;

inline std::vector<double> random_unit(std::mt19937_64& gen, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(d);
  long double norm = 0;
  do {
    norm = 0;
    for (auto& x : v) {
      x = normal(gen);
      norm += static_cast<long double>(x) * x;
    }
  } while (norm == 0);
  norm = std::sqrt(norm);
  for (auto& x : v) x = static_cast<double>(x / norm);
  return v;
}

inline std::vector<tokcomp::EmbeddedToken> random_tokens(std::mt19937_64& gen, std::size_t n,
                                                         std::size_t d, double critical_p = 0.0) {
  std::bernoulli_distribution critical(critical_p);
  std::vector<tokcomp::EmbeddedToken> toks(n);
  for (std::size_t i = 0; i < n; ++i) {
    toks[i].text = "w" + std::to_string(i);
    toks[i].position = i;
    toks[i].embedding = random_unit(gen, d);
    if (critical(gen)) toks[i].flags.insert("critical");
  }
  return toks;
}

inline tokcomp::Document random_document(std::mt19937_64& gen, std::size_t n, std::size_t d,
                                         double critical_p = 0.0) {
  tokcomp::Document doc;
  doc.id = "rand";
  doc.domain_tag = "test";
  doc.tokens = random_tokens(gen, n, d, critical_p);
  return doc;
}

/// Edge weight evaluated in long double straight from the definition.
inline long double weight(const std::vector<double>& a, const std::vector<double>& b, long i,
                          long j, double lambda, double tau) {
  long double c = 0;
  for (std::size_t k = 0; k < a.size(); ++k) c += static_cast<long double>(a[k]) * b[k];
  if (c < 0) c = 0;
  return lambda * c + (1.0L - lambda) * std::exp(-std::fabs(static_cast<long double>(i - j)) / tau);
}

/// All-pairs top-k of node i: sort every other node by (weight desc, index asc).
inline std::vector<std::size_t> brute_top_k(const tokcomp::Document& doc, std::size_t i,
                                            std::size_t k, double lambda, double tau) {
  std::vector<std::pair<long double, std::size_t>> all;
  for (std::size_t j = 0; j < doc.tokens.size(); ++j) {
    if (j == i) continue;
    const long double w = weight(doc.tokens[i].embedding, doc.tokens[j].embedding,
                                 static_cast<long>(i), static_cast<long>(j), lambda, tau);
    if (w > 0) all.push_back({w, j});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < std::min(k, all.size()); ++r) out.push_back(all[r].second);
  return out;
}

/// Solves A x = y by Gaussian elimination with partial pivoting.
inline std::vector<long double> solve(Matrix a, std::vector<long double> y) {
  const std::size_t n = y.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(y[col], y[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      y[r] -= f * y[col];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    long double acc = y[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return x;
}

/// Fixed point of s = (1-alpha) b + alpha P^T s via (I - alpha P^T) s = (1-alpha) b.
inline std::vector<long double> propagation_fixed_point(const Matrix& p,
                                                        const std::vector<double>& b,
                                                        double alpha) {
  const std::size_t n = b.size();
  Matrix a(n, std::vector<long double>(n, 0));
  std::vector<long double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r][c] = (r == c ? 1.0L : 0.0L) - alpha * p[c][r];
    y[r] = (1.0L - alpha) * b[r];
  }
  return solve(a, y);
}

/// Softmax of (e_i . mean) / sqrt(d) in long double.
inline std::vector<long double> attention(const std::vector<tokcomp::EmbeddedToken>& toks) {
  const std::size_t d = toks.front().embedding.size();
  std::vector<long double> mean(d, 0);
  for (const auto& t : toks)
    for (std::size_t k = 0; k < d; ++k) mean[k] += t.embedding[k];
  for (auto& m : mean) m /= toks.size();
  std::vector<long double> z(toks.size());
  long double total = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    long double acc = 0;
    for (std::size_t k = 0; k < d; ++k) acc += toks[i].embedding[k] * mean[k];
    z[i] = std::exp(acc / std::sqrt(static_cast<long double>(d)));
    total += z[i];
  }
  for (auto& x : z) x /= total;
  return z;
}

/// Coverage predicate checked by scanning every (dropped, kept) pair of the
/// graph's stored weights.
template <typename Graph>
bool covers(const Graph& g, const std::vector<std::size_t>& kept, double theta) {
  const std::set<std::size_t> keep(kept.begin(), kept.end());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (keep.count(i)) continue;
    bool ok = false;
    for (std::size_t j : keep) {
      const auto w = g.weight(i, j);
      if (w && *w >= theta) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

/// Importance-weighted pooled cosine in long double.
inline long double retention(const std::vector<tokcomp::EmbeddedToken>& toks,
                             const std::vector<std::size_t>& kept, const std::vector<double>& w) {
  const std::size_t d = toks.front().embedding.size();
  std::vector<long double> a(d, 0), b(d, 0);
  long double wa = 0, wb = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const bool in = std::find(kept.begin(), kept.end(), i) != kept.end();
    for (std::size_t k = 0; k < d; ++k) {
      b[k] += w[i] * toks[i].embedding[k];
      if (in) a[k] += w[i] * toks[i].embedding[k];
    }
    wb += w[i];
    if (in) wa += w[i];
  }
  long double dotp = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < d; ++k) {
    a[k] /= wa;
    b[k] /= wb;
    dotp += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  const long double c = dotp / std::sqrt(na * nb);
  return c < 0 ? 0 : c;
}

}  // namespace oracle
