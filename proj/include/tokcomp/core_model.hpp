// Shared domain types for the token compression pipeline.
//
// Every other header builds on the types declared here: embedded tokens and
// documents, the sparse token graph, importance vectors, compression results
// and the flat pipeline configuration together with its validation rules.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tokcomp {

using Embedding = std::vector<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value outside its permitted range. `field()` names the
/// offending PipelineConfig member.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Malformed or inconsistent input data. `line()` is 1-based when the error
/// came from a line-oriented file, 0 otherwise.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline constexpr const char* kCriticalFlag = "critical";

struct EmbeddedToken {
  std::string text;
  Embedding embedding;
  std::size_t position = 0;
  std::set<std::string> flags;

  bool is_critical() const { return flags.count(kCriticalFlag) != 0; }
  bool operator==(const EmbeddedToken&) const = default;
};

struct Document {
  std::string id;
  std::vector<EmbeddedToken> tokens;
  std::optional<std::vector<EmbeddedToken>> visual_tokens;
  std::string domain_tag;

  std::size_t size() const { return tokens.size(); }
  bool is_multimodal() const { return visual_tokens.has_value(); }
  bool operator==(const Document&) const = default;
};

/// Neighbor entry of a TokenGraph adjacency row.
struct Edge {
  std::size_t to = 0;
  double weight = 0.0;
  bool operator==(const Edge&) const = default;
};

struct DegreeMeta {
  std::size_t degree = 0;
  double max_weight = 0.0;
  bool operator==(const DegreeMeta&) const = default;
};

/// Sparse symmetric weighted graph. Adjacency rows are sorted by neighbor
/// index; an edge (i, j) is stored in both row i and row j with the same
/// weight.
class TokenGraph {
 public:
  TokenGraph() = default;
  explicit TokenGraph(std::size_t n) : adjacency_(n), meta_(n) {}

  std::size_t size() const { return adjacency_.size(); }

  std::span<const Edge> neighbors(std::size_t i) const { return adjacency_.at(i); }
  const DegreeMeta& degree_meta(std::size_t i) const { return meta_.at(i); }

  /// Weight of edge (i, j), or nullopt when the edge is not stored.
  std::optional<double> weight(std::size_t i, std::size_t j) const {
    const auto& row = adjacency_.at(i);
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const Edge& e, std::size_t k) { return e.to < k; });
    if (it == row.end() || it->to != j) return std::nullopt;
    return it->weight;
  }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto& row : adjacency_) total += row.size();
    return total / 2;
  }

  /// Adds the undirected edge (i, j). Rows must be finalized afterwards.
  void add_edge(std::size_t i, std::size_t j, double w) {
    if (i == j) throw Error("self-edge requested");
    adjacency_.at(i).push_back({j, w});
    adjacency_.at(j).push_back({i, w});
  }

  /// Sorts rows, drops duplicate entries and recomputes degree metadata.
  void finalize() {
    for (std::size_t i = 0; i < adjacency_.size(); ++i) {
      auto& row = adjacency_[i];
      std::sort(row.begin(), row.end(),
                [](const Edge& a, const Edge& b) { return a.to < b.to; });
      row.erase(std::unique(row.begin(), row.end(),
                            [](const Edge& a, const Edge& b) { return a.to == b.to; }),
                row.end());
      DegreeMeta m;
      m.degree = row.size();
      for (const auto& e : row) m.max_weight = std::max(m.max_weight, e.weight);
      meta_[i] = m;
    }
  }

 private:
  std::vector<std::vector<Edge>> adjacency_;
  std::vector<DegreeMeta> meta_;
};

/// Nonnegative per-token significance distribution summing to one.
struct ImportanceVector {
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
  double operator[](std::size_t i) const { return scores[i]; }
  bool operator==(const ImportanceVector&) const = default;

  double sum() const {
    double total = 0.0;
    for (double s : scores) total += s;
    return total;
  }

  bool is_valid(double tol = 1e-9) const {
    if (scores.empty()) return false;
    for (double s : scores)
      if (!(s >= 0.0) || !std::isfinite(s)) return false;
    return std::abs(sum() - 1.0) <= tol;
  }
};

struct CompressionResult {
  std::vector<std::size_t> kept;  // strictly increasing original indices
  ImportanceVector scores;
  double retention = 0.0;
  std::optional<double> alignment_before;
  std::optional<double> alignment_after;
  std::size_t controller_steps = 0;
  double kept_ratio = 0.0;

  bool operator==(const CompressionResult&) const = default;
};

struct PipelineConfig {
  std::size_t d = 32;
  double lambda_sem = 0.7;
  double tau = 4.0;
  std::size_t k_neighbors = 8;
  double alpha = 0.85;
  double epsilon = 1e-9;
  std::size_t max_iters = 100;
  double rho = 0.55;
  double rho_min = 0.1;
  double theta_cov = 0.3;
  double target_retention = 0.9;
  std::size_t k_cross = 4;
  double delta_align = 0.05;
  double theta_sem = 0.85;
  std::size_t g_max = 3;
  double w_c = 0.5;
  double w_r = 0.5;
  double mu = 0.1;
  std::uint64_t seed = 0;

  bool operator==(const PipelineConfig&) const = default;
};

namespace detail {

inline void require(bool ok, const char* field, const char* rule) {
  if (!ok) throw ConfigError(field, std::string("must satisfy ") + rule);
}

inline bool finite(double x) { return std::isfinite(x); }

}  // namespace detail

/// Throws ConfigError naming the first field outside its range.
inline void validate_config(const PipelineConfig& c) {
  using detail::finite;
  using detail::require;
  require(c.d >= 2, "d", "d >= 2");
  require(finite(c.lambda_sem) && c.lambda_sem >= 0 && c.lambda_sem <= 1, "lambda_sem",
          "0 <= lambda_sem <= 1");
  require(finite(c.tau) && c.tau > 0, "tau", "tau > 0");
  require(c.k_neighbors >= 1, "k_neighbors", "k_neighbors >= 1");
  require(finite(c.alpha) && c.alpha >= 0 && c.alpha < 1, "alpha", "0 <= alpha < 1");
  require(finite(c.epsilon) && c.epsilon > 0, "epsilon", "epsilon > 0");
  require(c.max_iters >= 1, "max_iters", "max_iters >= 1");
  require(finite(c.rho) && c.rho > 0 && c.rho <= 1, "rho", "0 < rho <= 1");
  require(finite(c.rho_min) && c.rho_min > 0 && c.rho_min <= 1, "rho_min",
          "0 < rho_min <= 1");
  require(finite(c.theta_cov) && c.theta_cov >= 0 && c.theta_cov <= 1, "theta_cov",
          "0 <= theta_cov <= 1");
  require(finite(c.target_retention) && c.target_retention >= 0 && c.target_retention <= 1,
          "target_retention", "0 <= target_retention <= 1");
  require(c.k_cross >= 1, "k_cross", "k_cross >= 1");
  require(finite(c.delta_align) && c.delta_align >= 0, "delta_align", "delta_align >= 0");
  require(finite(c.theta_sem) && c.theta_sem >= 0 && c.theta_sem <= 1, "theta_sem",
          "0 <= theta_sem <= 1");
  require(c.g_max >= 1, "g_max", "g_max >= 1");
  require(finite(c.w_c) && c.w_c >= 0, "w_c", "w_c >= 0");
  require(finite(c.w_r) && c.w_r >= 0, "w_r", "w_r >= 0");
  require(finite(c.mu) && c.mu >= 0, "mu", "mu >= 0");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Cosine similarity; nullopt when either vector is zero.
inline std::optional<double> cosine(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return dot(a, b) / (na * nb);
}

namespace detail {

inline constexpr double kUnitNormSlack = 1e-6;
// Norms closer to one than this are left untouched.
inline constexpr double kExactNormSlack = 1e-12;

// Norm accumulated in long double so near-unit vectors rescale to within a
// few ulps of one.
inline long double precise_norm(std::span<const double> e) {
  long double acc = 0.0L;
  for (double x : e) acc += static_cast<long double>(x) * x;
  return std::sqrt(acc);
}

inline void check_token_list(std::vector<EmbeddedToken>& tokens, std::size_t d,
                             const char* which) {
  if (tokens.empty()) throw DataError(std::string("empty ") + which + " token list");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto& tok = tokens[i];
    if (tok.position != i)
      throw DataError(std::string("non-contiguous positions in ") + which + " tokens at index " +
                      std::to_string(i));
    if (tok.embedding.size() != d)
      throw DataError("dimension mismatch at " + std::string(which) + " token " +
                      std::to_string(i) + ": expected " + std::to_string(d) + ", got " +
                      std::to_string(tok.embedding.size()));
    for (double x : tok.embedding)
      if (!std::isfinite(x))
        throw DataError("non-finite embedding entry at " + std::string(which) + " token " +
                        std::to_string(i));
    const long double norm = precise_norm(tok.embedding);
    if (norm == 0.0L || std::abs(static_cast<double>(norm) - 1.0) > kUnitNormSlack)
      throw DataError("non-normalizable embedding at " + std::string(which) + " token " +
                      std::to_string(i));
    if (std::abs(static_cast<double>(norm) - 1.0) > kExactNormSlack)
      for (double& x : tok.embedding) x = static_cast<double>(x / norm);
  }
}

}  // namespace detail

/// Checks document invariants against cfg.d. Embeddings within 1e-6 of unit
/// norm are rescaled to unit norm (norms already within 1e-12 are kept as
/// is); anything else throws DataError.
inline Document validate_document(Document doc, const PipelineConfig& cfg) {
  detail::check_token_list(doc.tokens, cfg.d, "text");
  if (doc.visual_tokens) detail::check_token_list(*doc.visual_tokens, cfg.d, "visual");
  return doc;
}

}  // namespace tokcomp
