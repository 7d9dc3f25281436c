// Curriculum-ordered, reward-driven hyperparameter hill climbing.
//
// Documents are sorted short-to-long and split into buckets. Within each
// bucket one tunable is nudged per step and the move is kept only if the
// bucket's mean reward strictly improves. After each bucket the best config
// so far (by mean reward over the whole training pool) is checkpointed. The
// last 20% of the curriculum is held out and only used to pick between the
// initial and the trained config.

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tokcomp/core_model.hpp"
#include "tokcomp/counter_rng.hpp"
#include "tokcomp/multimodal.hpp"
#include "tokcomp/parallel.hpp"
#include "tokcomp/scoring.hpp"

namespace tokcomp {

struct RewardBreakdown {
  double compression_term = 0.0;
  double retention_term = 0.0;
  double sparsity_penalty = 0.0;
  double total = 0.0;
};

struct Checkpoint {
  PipelineConfig config;
  double mean_reward = 0.0;  // over the training pool
  std::size_t bucket_index = 0;
  std::size_t accepted_moves = 0;  // cumulative
};

struct AcceptedMove {
  std::size_t bucket_index = 0;
  std::size_t step = 0;
  std::string parameter;
  double mean_reward = 0.0;  // over the bucket
};

struct TrainResult {
  PipelineConfig best;
  std::vector<Checkpoint> history;
  std::vector<AcceptedMove> accepted;
  double initial_holdout_reward = 0.0;
  double final_holdout_reward = 0.0;
};

/// total = w_c (1 - kept_ratio) + w_r retention - mu entropy(scores).
inline RewardBreakdown reward(const CompressionResult& result, const ImportanceVector& scores,
                              const PipelineConfig& cfg) {
  RewardBreakdown r;
  r.compression_term = 1.0 - result.kept_ratio;
  r.retention_term = result.retention;
  r.sparsity_penalty = scores.size() >= 2 ? score_entropy(scores) : 0.0;
  r.total = cfg.w_c * r.compression_term + cfg.w_r * r.retention_term - cfg.mu * r.sparsity_penalty;
  return r;
}

/// Indices sorted by token count, ties by document id.
inline std::vector<std::size_t> curriculum_order(std::span<const Document> corpus) {
  if (corpus.empty()) throw DataError("curriculum_order: empty corpus");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (corpus[a].tokens.size() != corpus[b].tokens.size())
      return corpus[a].tokens.size() < corpus[b].tokens.size();
    if (corpus[a].id != corpus[b].id) return corpus[a].id < corpus[b].id;
    return a < b;
  });
  return order;
}

/// Sizes of `buckets` near-equal consecutive partitions of `count` items;
/// earlier buckets take the remainder.
inline std::vector<std::size_t> bucket_sizes(std::size_t count, std::size_t buckets) {
  buckets = std::max<std::size_t>(1, std::min(buckets, count));
  std::vector<std::size_t> sizes(buckets, count / buckets);
  for (std::size_t i = 0; i < count % buckets; ++i) ++sizes[i];
  return sizes;
}

/// One entry of the hill-climb step table.
struct TunableStep {
  const char* name;
  bool multiplicative;
  double step;
  double lo;
  double hi;
  double PipelineConfig::*field;
};

inline constexpr double kTrainStep = 0.05;

inline const std::vector<TunableStep>& step_table() {
  static const std::vector<TunableStep> table{
      {"lambda_sem", false, kTrainStep, 0.0, 1.0, &PipelineConfig::lambda_sem},
      {"alpha", false, kTrainStep, 0.0, 0.99, &PipelineConfig::alpha},
      {"tau", true, kTrainStep, 0.05, 1e6, &PipelineConfig::tau},
      {"theta_cov", false, kTrainStep, 0.0, 1.0, &PipelineConfig::theta_cov},
      {"rho_min", false, kTrainStep, 0.01, 1.0, &PipelineConfig::rho_min},
  };
  return table;
}

struct TrainOptions {
  std::size_t steps_per_bucket = 20;
  std::size_t buckets = 4;
  double holdout_fraction = 0.2;
  std::size_t threads = 1;
};

namespace detail {

inline double mean_reward(std::span<const Document> corpus, std::span<const std::size_t> docs,
                          const PipelineConfig& cfg, std::size_t threads) {
  std::vector<double> totals(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t k) {
    const auto r = compress(corpus[docs[k]], cfg);
    totals[k] = reward(r, r.scores, cfg).total;
  });
  double sum = 0.0;
  for (double t : totals) sum += t;
  return sum / static_cast<double>(docs.size());
}

// Nudges one tunable chosen by the seeded generator; returns its name.
inline std::string propose(PipelineConfig& cfg, std::uint64_t seed, std::size_t bucket,
                           std::size_t step) {
  const rng::CounterRng g(seed, rng::Stream::kTrainer, bucket, step);
  const auto& table = step_table();
  const auto& t = table[g.below(0, table.size())];
  const bool up = g.uniform(1) < 0.5;
  double& v = cfg.*(t.field);
  if (t.multiplicative)
    v *= up ? 1.0 + t.step : 1.0 - t.step;
  else
    v += up ? t.step : -t.step;
  v = std::clamp(v, t.lo, t.hi);
  return t.name;
}

}  // namespace detail

inline TrainResult train(std::span<const Document> corpus, const PipelineConfig& cfg0,
                         const TrainOptions& opts) {
  if (corpus.empty()) throw DataError("train: empty corpus");
  if (opts.steps_per_bucket < 1) throw ConfigError("steps_per_bucket", "must be >= 1");
  validate_config(cfg0);

  const auto order = curriculum_order(corpus);
  const std::size_t n = order.size();
  std::size_t holdout = static_cast<std::size_t>(opts.holdout_fraction * static_cast<double>(n));
  if (holdout >= n) holdout = 0;
  const std::span<const std::size_t> pool(order.data(), n - holdout);
  const std::span<const std::size_t> held =
      holdout > 0 ? std::span<const std::size_t>(order.data() + (n - holdout), holdout) : pool;

  TrainResult out;
  PipelineConfig best = cfg0;
  double best_pool_reward = detail::mean_reward(corpus, pool, best, opts.threads);
  std::size_t accepted_total = 0;

  std::size_t offset = 0;
  const auto sizes = bucket_sizes(pool.size(), opts.buckets);
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const auto bucket = pool.subspan(offset, sizes[b]);
    offset += sizes[b];
    PipelineConfig current = best;
    double current_reward = detail::mean_reward(corpus, bucket, current, opts.threads);
    for (std::size_t step = 0; step < opts.steps_per_bucket; ++step) {
      PipelineConfig candidate = current;
      const std::string name = detail::propose(candidate, cfg0.seed, b, step);
      if (candidate == current) continue;
      const double r = detail::mean_reward(corpus, bucket, candidate, opts.threads);
      if (r > current_reward) {
        current = candidate;
        current_reward = r;
        ++accepted_total;
        out.accepted.push_back({b, step, name, r});
      }
    }
    if (!(current == best)) {
      const double pool_reward = detail::mean_reward(corpus, pool, current, opts.threads);
      if (pool_reward > best_pool_reward) {
        best = current;
        best_pool_reward = pool_reward;
      }
    }
    out.history.push_back({best, best_pool_reward, b, accepted_total});
  }

  out.initial_holdout_reward = detail::mean_reward(corpus, held, cfg0, opts.threads);
  out.final_holdout_reward = best == cfg0
                                 ? out.initial_holdout_reward
                                 : detail::mean_reward(corpus, held, best, opts.threads);
  if (out.final_holdout_reward < out.initial_holdout_reward) {
    best = cfg0;
    out.final_holdout_reward = out.initial_holdout_reward;
  }
  out.best = best;
  return out;
}

}  // namespace tokcomp
