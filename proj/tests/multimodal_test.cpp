#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tokcomp/datagen.hpp"
#include "tokcomp/multimodal.hpp"

namespace tokcomp {
namespace {

TEST(AlignmentScore, Basics) {
  const std::vector<double> a{0.3, 0.4}, b{1, 0}, c{0, 1};
  EXPECT_NEAR(alignment_score(a, a), 1.0, 1e-15);
  EXPECT_EQ(alignment_score(b, c), 0.0);
  // Unit vectors 60 degrees apart.
  const std::vector<double> r{0.5, std::sqrt(3.0) / 2.0};
  EXPECT_NEAR(alignment_score(b, r), 0.5, 1e-15);
  EXPECT_EQ(alignment_score(b, std::vector<double>{-1, 0}), 0.0);
  EXPECT_THROW(alignment_score(b, std::vector<double>{0, 0}), DataError);
}

TEST(Pool, SingletonAndConvexity) {
  std::mt19937_64 gen(1);
  auto toks = oracle::random_tokens(gen, 3, 4);
  const std::vector<std::size_t> one{1};
  const std::vector<double> w{0.2, 0.3, 0.5};
  const auto single = pool(toks, one, w);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(single[k], toks[1].embedding[k], 1e-15);

  toks[2].embedding = toks[0].embedding;
  const std::vector<std::size_t> pair{0, 2};
  const auto p = pool(toks, pair, w);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(p[k], toks[0].embedding[k], 1e-15);
}

TEST(Pool, WeightedMeanByHand) {
  std::vector<EmbeddedToken> toks{{"a", {1, 0}, 0, {}}, {"b", {0, 1}, 1, {}}, {"c", {0.6, 0.8}, 2, {}}};
  const std::vector<std::size_t> all{0, 1, 2};
  const auto p = pool(toks, all, std::vector<double>{0.2, 0.3, 0.5});
  // (0.2*1 + 0.5*0.6, 0.3*1 + 0.5*0.8) / 1.0
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.7, 1e-15);
}

TEST(Pool, Errors) {
  std::vector<EmbeddedToken> toks{{"a", {1, 0}, 0, {}}};
  EXPECT_THROW(pool(toks, std::vector<std::size_t>{}, std::vector<double>{1.0}), DataError);
  EXPECT_THROW(pool(toks, std::vector<std::size_t>{0}, std::vector<double>{0.0}), DataError);
}

Document paired_doc(std::uint64_t seed, bool visual_copies_text) {
  std::mt19937_64 gen(seed);
  Document doc = oracle::random_document(gen, 12, 6);
  if (visual_copies_text) {
    doc.visual_tokens = doc.tokens;
  } else {
    doc.visual_tokens = oracle::random_tokens(gen, 5, 6);
  }
  return doc;
}

TEST(CompressMultimodal, MissingVisualTokensIsAnError) {
  std::mt19937_64 gen(1);
  PipelineConfig cfg;
  cfg.d = 4;
  EXPECT_THROW(compress_multimodal(oracle::random_document(gen, 5, 4), cfg), DataError);
}

// With k_cross covering every visual token the extended graph is symmetric
// under swapping each text token with its visual copy, so both modalities get
// the same importance weights.
TEST(CompressMultimodal, IdenticalModalitiesAreFullyAligned) {
  PipelineConfig cfg;
  cfg.d = 6;
  cfg.k_cross = 12;
  const auto r = compress_multimodal(paired_doc(3, true), cfg);
  EXPECT_NEAR(*r.alignment_before, 1.0, 1e-12);
  EXPECT_GE(*r.alignment_after, *r.alignment_before - cfg.delta_align);
}

TEST(CompressMultimodal, ExtendedScoresCoverBothModalities) {
  PipelineConfig cfg;
  cfg.d = 6;
  const Document doc = paired_doc(4, false);
  const auto r = compress_multimodal(doc, cfg);
  EXPECT_EQ(r.scores.size(), doc.tokens.size() + doc.visual_tokens->size());
  EXPECT_TRUE(r.scores.is_valid());
  EXPECT_EQ(r.kept_ratio, static_cast<double>(r.kept.size()) / doc.tokens.size());
  for (std::size_t k : r.kept) EXPECT_LT(k, doc.tokens.size());
}

TEST(CompressMultimodal, DisabledConstraintMatchesTextOnlyController) {
  PipelineConfig cfg;
  cfg.d = 6;
  cfg.delta_align = 1.0;
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const Document doc = paired_doc(seed, false);
    const auto constrained_off = compress_multimodal(doc, cfg);
    CompressOptions opts;
    opts.alignment_constraint = false;
    const auto text_only = compress_multimodal(doc, cfg, opts);
    EXPECT_EQ(constrained_off, text_only);
  }
}

TEST(CompressMultimodal, AlignmentFloorHolds) {
  GenSpec spec;
  spec.n_docs = 40;
  spec.multimodal = true;
  spec.seed = 5;
  PipelineConfig cfg;
  cfg.d = spec.d;
  for (const auto& doc : generate(spec)) {
    const auto r = compress_multimodal(doc, cfg);
    EXPECT_TRUE(*r.alignment_after >= *r.alignment_before - cfg.delta_align ||
                r.kept.size() == doc.tokens.size());
    EXPECT_TRUE(r.retention >= cfg.target_retention || r.kept.size() == doc.tokens.size());
  }
}

TEST(CompressMultimodal, ConstraintDoesNotLowerMeanAlignment) {
  GenSpec spec;
  spec.n_docs = 200;
  spec.multimodal = true;
  spec.seed = 11;
  PipelineConfig on;
  on.d = spec.d;
  PipelineConfig off = on;
  off.delta_align = 1.0;
  double sum_on = 0, sum_off = 0;
  for (const auto& doc : generate(spec)) {
    sum_on += *compress_multimodal(doc, on).alignment_after;
    sum_off += *compress_multimodal(doc, off).alignment_after;
  }
  EXPECT_GE(sum_on, sum_off);
}

TEST(Compress, DispatchesOnModality) {
  PipelineConfig cfg;
  cfg.d = 6;
  const Document doc = paired_doc(2, false);
  EXPECT_TRUE(compress(doc, cfg).alignment_after.has_value());
  Document text = doc;
  text.visual_tokens.reset();
  EXPECT_FALSE(compress(text, cfg).alignment_after.has_value());
}

}  // namespace
}  // namespace tokcomp
