// Deterministic synthetic corpora.
//
// Documents are drawn around a small set of seed-derived topic directions,
// with a controllable fraction of near-duplicate tokens. All randomness is
// keyed by (seed, document, token), so output is independent of thread count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "tokcomp/core_model.hpp"
#include "tokcomp/counter_rng.hpp"
#include "tokcomp/parallel.hpp"

namespace tokcomp {

struct GenSpec {
  std::size_t n_docs = 200;
  std::size_t tokens_min = 48;
  std::size_t tokens_max = 160;
  std::size_t d = 32;
  std::size_t n_topics = 8;
  std::size_t topics_per_doc = 3;
  double redundancy = 0.5;
  double noise_sigma = 0.3;
  double critical_frac = 0.05;
  bool multimodal = false;
  std::size_t visual_tokens_per_doc = 8;
  std::uint64_t seed = 42;
  // Domain tags are assigned round-robin by document index.
  std::vector<std::string> domains{"synthetic"};

  bool operator==(const GenSpec&) const = default;
};

inline void validate_gen_spec(const GenSpec& s) {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) throw ConfigError(field, std::string("must satisfy ") + rule);
  };
  require(s.tokens_min >= 1, "tokens_min", "tokens_min >= 1");
  require(s.tokens_max >= s.tokens_min, "tokens_max", "tokens_max >= tokens_min");
  require(s.d >= 2, "d", "d >= 2");
  require(s.n_topics >= 1, "n_topics", "n_topics >= 1");
  require(s.topics_per_doc >= 1, "topics_per_doc", "topics_per_doc >= 1");
  require(std::isfinite(s.redundancy) && s.redundancy >= 0 && s.redundancy <= 1, "redundancy",
          "0 <= redundancy <= 1");
  require(std::isfinite(s.noise_sigma) && s.noise_sigma >= 0, "noise_sigma", "noise_sigma >= 0");
  require(std::isfinite(s.critical_frac) && s.critical_frac >= 0 && s.critical_frac <= 1,
          "critical_frac", "0 <= critical_frac <= 1");
  require(!s.multimodal || s.visual_tokens_per_doc >= 1, "visual_tokens_per_doc",
          "visual_tokens_per_doc >= 1 for multimodal corpora");
  require(!s.domains.empty(), "domains", "at least one domain tag");
}

namespace detail {

inline Embedding gaussian_vector(const rng::CounterRng& g, std::size_t d) {
  Embedding v(d);
  for (std::size_t k = 0; k < d; ++k) v[k] = g.gaussian(k);
  return v;
}

inline void normalize_in_place(Embedding& v) {
  const double norm = l2_norm(v);
  for (double& x : v) x /= norm;
}

// normalize(base + sigma * g); sigma == 0 returns base untouched.
inline Embedding perturb(const Embedding& base, double sigma, const rng::CounterRng& g) {
  if (sigma == 0.0) return base;
  Embedding v = gaussian_vector(g, base.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = base[k] + sigma * v[k];
  normalize_in_place(v);
  return v;
}

inline std::string doc_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "doc-%05zu", index);
  return buf;
}

inline constexpr double kNearCopyScale = 0.01;

}  // namespace detail

/// The n_topics unit topic directions for a seed.
inline std::vector<Embedding> topic_vectors(const GenSpec& spec) {
  std::vector<Embedding> topics;
  for (std::size_t t = 0; t < spec.n_topics; ++t) {
    Embedding v = detail::gaussian_vector(rng::CounterRng(spec.seed, rng::Stream::kTopic, t), spec.d);
    detail::normalize_in_place(v);
    topics.push_back(std::move(v));
  }
  return topics;
}

/// Generates document `index` of the corpus described by `spec`.
inline Document generate_document(const GenSpec& spec, const std::vector<Embedding>& topics,
                                   std::size_t index) {
  using rng::CounterRng;
  using rng::Stream;
  const auto seed = spec.seed;
  Document doc;
  doc.id = detail::doc_id(index);
  doc.domain_tag = spec.domains[index % spec.domains.size()];

  const std::size_t span = spec.tokens_max - spec.tokens_min + 1;
  const std::size_t n = spec.tokens_min + CounterRng(seed, Stream::kDocLength, index).below(0, span);

  const std::size_t k = std::min(spec.topics_per_doc, spec.n_topics);
  std::vector<std::size_t> doc_topics;
  const CounterRng topic_pick(seed, Stream::kDocTopics, index);
  for (std::size_t c = 0; doc_topics.size() < k; ++c) {
    const std::size_t t = topic_pick.below(c, spec.n_topics);
    if (std::find(doc_topics.begin(), doc_topics.end(), t) == doc_topics.end())
      doc_topics.push_back(t);
  }

  doc.tokens.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    EmbeddedToken tok;
    tok.position = i;
    const bool near_copy =
        i > 0 && CounterRng(seed, Stream::kRedundancy, index).uniform(i) < spec.redundancy;
    if (near_copy) {
      const std::size_t src = CounterRng(seed, Stream::kCopySource, index).below(i, i);
      tok.embedding = detail::perturb(doc.tokens[src].embedding, detail::kNearCopyScale,
                                      CounterRng(seed, Stream::kTokenNoise, index, i));
      tok.text = doc.tokens[src].text + "'";
    } else {
      const std::size_t t = doc_topics[CounterRng(seed, Stream::kTokenTopic, index).below(i, k)];
      tok.embedding = detail::perturb(topics[t], spec.noise_sigma,
                                      CounterRng(seed, Stream::kTokenNoise, index, i));
      tok.text = "t" + std::to_string(t) + "_" + std::to_string(i);
    }
    if (CounterRng(seed, Stream::kCritical, index).uniform(i) < spec.critical_frac)
      tok.flags.insert(kCriticalFlag);
    doc.tokens.push_back(std::move(tok));
  }

  if (spec.multimodal) {
    std::vector<EmbeddedToken> visual;
    const CounterRng vis_topic(seed, Stream::kVisual, index);
    for (std::size_t j = 0; j < spec.visual_tokens_per_doc; ++j) {
      EmbeddedToken tok;
      tok.position = j;
      const std::size_t t = doc_topics[vis_topic.below(j, k)];
      tok.embedding = detail::perturb(topics[t], spec.noise_sigma,
                                      CounterRng(seed, Stream::kVisual, index, j + 1));
      tok.text = "v" + std::to_string(t) + "_" + std::to_string(j);
      visual.push_back(std::move(tok));
    }
    doc.visual_tokens = std::move(visual);
  }
  return doc;
}

inline std::vector<Document> generate(const GenSpec& spec, std::size_t threads = 1) {
  validate_gen_spec(spec);
  const auto topics = topic_vectors(spec);
  std::vector<Document> corpus(spec.n_docs);
  parallel_for(spec.n_docs, threads,
               [&](std::size_t i) { corpus[i] = generate_document(spec, topics, i); });
  return corpus;
}

/// normalize(e + sigma * g) for every text and visual embedding, with g keyed
/// by (seed, document id, token index).
inline Document inject_noise(const Document& doc, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DataError("inject_noise: sigma must be nonnegative");
  Document out = doc;
  if (sigma == 0.0) return out;
  const std::uint64_t key = rng::hash_string(doc.id);
  for (auto& tok : out.tokens)
    tok.embedding = detail::perturb(tok.embedding, sigma,
                                    rng::CounterRng(seed, rng::Stream::kInjectNoise, key, tok.position));
  if (out.visual_tokens) {
    const std::uint64_t offset = out.tokens.size();
    for (auto& tok : *out.visual_tokens)
      tok.embedding = detail::perturb(
          tok.embedding, sigma,
          rng::CounterRng(seed, rng::Stream::kInjectNoise, key, offset + tok.position));
  }
  return out;
}

}  // namespace tokcomp
