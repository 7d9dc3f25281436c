// Budgeted keep-set selection with coverage repair, and the retention-target
// controller that drives it.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "tokcomp/core_model.hpp"
#include "tokcomp/metrics.hpp"
#include "tokcomp/scoring.hpp"
#include "tokcomp/token_graph.hpp"

namespace tokcomp {

struct SelectionParams {
  std::size_t m = 1;
  double theta_cov = 0.3;
  bool repair = true;  // false skips the coverage phase
};

/// Pipeline stages that can be switched off for ablation runs, plus the
/// fixed-budget mode which bypasses the controller and keeps ceil(rho * n).
struct CompressOptions {
  bool propagation = true;
  bool coverage = true;
  bool alignment_constraint = true;
  bool fixed_budget = false;
};

/// Accumulated wall-clock time per stage, in milliseconds.
struct StageTimings {
  double graph_ms = 0.0;
  double scoring_ms = 0.0;
  double selection_ms = 0.0;

  StageTimings& operator+=(const StageTimings& o) {
    graph_ms += o.graph_ms;
    scoring_ms += o.scoring_ms;
    selection_ms += o.selection_ms;
    return *this;
  }
};

namespace detail {

class StageClock {
 public:
  StageClock() : start_(std::chrono::steady_clock::now()) {}
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Indices by descending score, ties toward the smaller index.
inline std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

inline bool has_covering_neighbor(const TokenGraph& g, std::size_t i,
                                  const std::vector<bool>& kept, double theta) {
  for (const auto& e : g.neighbors(i))
    if (kept[e.to] && e.weight >= theta) return true;
  return false;
}

inline std::size_t budget_count(double ratio, std::size_t n) {
  // The small slack keeps products such as 0.1 * 30 from rounding up.
  const double raw = std::ceil(ratio * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

}  // namespace detail

/// Greedy top-m by score, then coverage repair: dropped tokens are visited by
/// descending score and kept when no kept neighbor reaches theta_cov. Scores
/// beyond g.size() are ignored.
inline std::vector<std::size_t> select(std::span<const double> scores, const TokenGraph& g,
                                       const SelectionParams& params) {
  const std::size_t n = g.size();
  const auto order = detail::rank_by_score(scores.first(n));
  std::vector<bool> kept(n, false);
  const std::size_t m = std::clamp<std::size_t>(params.m, 1, n);
  for (std::size_t r = 0; r < m; ++r) kept[order[r]] = true;
  if (params.repair) {
    for (std::size_t r = m; r < n; ++r) {
      const std::size_t i = order[r];
      if (!detail::has_covering_neighbor(g, i, kept, params.theta_cov)) kept[i] = true;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (kept[i]) out.push_back(i);
  return out;
}

inline std::vector<std::size_t> select(const ImportanceVector& scores, const TokenGraph& g,
                                       const SelectionParams& params) {
  return select(std::span<const double>(scores.scores), g, params);
}

namespace detail {

struct ControllerOutcome {
  std::vector<std::size_t> kept;
  double retention = 0.0;
  std::size_t steps = 0;
};

// Scans m upward from the controller floor and stops at the first keep-set
// whose retention reaches the target and which `extra_ok` accepts, or when
// every token is kept.
template <typename ExtraConstraint>
ControllerOutcome run_controller(const Document& doc, std::span<const double> text_scores,
                                 const TokenGraph& g, const PipelineConfig& cfg,
                                 const CompressOptions& opts, ExtraConstraint&& extra_ok) {
  const std::size_t n = doc.tokens.size();
  SelectionParams params;
  params.theta_cov = cfg.theta_cov;
  params.repair = opts.coverage;
  ControllerOutcome out;
  if (opts.fixed_budget) {
    params.m = budget_count(cfg.rho, n);
    out.kept = select(text_scores, g, params);
    out.retention = retention_score(doc, out.kept, text_scores);
    out.steps = 1;
    return out;
  }
  for (std::size_t m = budget_count(cfg.rho_min, n); m <= n; ++m) {
    params.m = m;
    out.kept = select(text_scores, g, params);
    out.retention = retention_score(doc, out.kept, text_scores);
    ++out.steps;
    if (out.kept.size() == n) break;
    if (out.retention >= cfg.target_retention && extra_ok(out.kept)) break;
  }
  return out;
}

}  // namespace detail

/// Graph, importance scores, then the retention-target controller.
inline CompressionResult compress_document(const Document& doc, const PipelineConfig& cfg,
                                           const CompressOptions& opts = {},
                                           StageTimings* timings = nullptr) {
  detail::StageClock clock;
  StageTimings t;
  const TokenGraph g = build_graph(doc, cfg);
  t.graph_ms = clock.lap_ms();

  ImportanceVector scores = base_scores(doc, cfg);
  if (opts.propagation) scores = propagate(scores, row_normalize(g), cfg).first;
  t.scoring_ms = clock.lap_ms();

  auto outcome = detail::run_controller(doc, scores.scores, g, cfg, opts,
                                        [](std::span<const std::size_t>) { return true; });
  t.selection_ms = clock.lap_ms();
  if (timings) *timings += t;

  CompressionResult r;
  r.kept = std::move(outcome.kept);
  r.scores = std::move(scores);
  r.retention = outcome.retention;
  r.controller_steps = outcome.steps;
  r.kept_ratio = static_cast<double>(r.kept.size()) / static_cast<double>(doc.tokens.size());
  return r;
}

/// 100 * (1 - compressed / baseline), rounded to one decimal.
inline double compression_percent(long long baseline_tokens, long long compressed_tokens) {
  if (baseline_tokens <= 0) throw DataError("compression_percent: baseline must be positive");
  if (compressed_tokens < 0 || compressed_tokens > baseline_tokens)
    throw DataError("compression_percent: compressed count must lie in [0, baseline]");
  const double raw = 100.0 * (1.0 - static_cast<double>(compressed_tokens) /
                                        static_cast<double>(baseline_tokens));
  return std::round(raw * 10.0) / 10.0;
}

}  // namespace tokcomp
