#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tokcomp/token_graph.hpp"

namespace tokcomp {
namespace {

std::vector<double> unit(std::initializer_list<double> v) { return v; }

TEST(EdgeWeight, IdenticalNeighborsBlendBothTerms) {
  PipelineConfig cfg;
  cfg.lambda_sem = 0.5;
  cfg.tau = 2.0;
  const auto e = unit({0.6, 0.8});
  // 0.5 + 0.5 * exp(-0.5), evaluated to 30 digits offline.
  EXPECT_NEAR(edge_weight(e, e, 3, 4, cfg), 0.803265329856316711801899767496, 1e-15);
}

TEST(EdgeWeight, OrthogonalAndAntiParallelGiveZeroSemanticWeight) {
  PipelineConfig cfg;
  cfg.lambda_sem = 1.0;
  EXPECT_EQ(edge_weight(unit({1, 0}), unit({0, 1}), 0, 1, cfg), 0.0);
  EXPECT_EQ(edge_weight(unit({1, 0}), unit({-1, 0}), 0, 1, cfg), 0.0);
}

TEST(EdgeWeight, SelfEdgeIsAnError) {
  EXPECT_THROW(edge_weight(unit({1, 0}), unit({1, 0}), 2, 2, PipelineConfig{}), Error);
}

TEST(EdgeWeight, BoundedAndSymmetricOnRandomInputs) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> lam(0.0, 1.0), tau(0.1, 20.0);
  for (int t = 0; t < 2000; ++t) {
    PipelineConfig cfg;
    cfg.lambda_sem = lam(gen);
    cfg.tau = tau(gen);
    const auto a = oracle::random_unit(gen, 8), b = oracle::random_unit(gen, 8);
    const std::size_t i = gen() % 50, j = i + 1 + gen() % 50;
    const double w = edge_weight(a, b, i, j, cfg);
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0);
    EXPECT_EQ(w, edge_weight(b, a, j, i, cfg));
  }
}

TEST(EdgeWeight, StrictlyDecreasesWithDistance) {
  std::mt19937_64 gen(5);
  PipelineConfig cfg;
  cfg.lambda_sem = 0.6;
  const auto a = oracle::random_unit(gen, 6), b = oracle::random_unit(gen, 6);
  double prev = 2.0;
  for (std::size_t gap = 1; gap < 40; ++gap) {
    const double w = edge_weight(a, b, 0, gap, cfg);
    EXPECT_LT(w, prev);
    prev = w;
  }
}

TEST(BuildGraph, SingleTokenHasNoEdges) {
  std::mt19937_64 gen(2);
  const auto doc = oracle::random_document(gen, 1, 4);
  const auto g = build_graph(doc, PipelineConfig{});
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(g.degree_meta(0), (DegreeMeta{0, 0.0}));
}

TEST(BuildGraph, SmallDocumentIsComplete) {
  std::mt19937_64 gen(3);
  const auto doc = oracle::random_document(gen, 3, 4);
  const auto g = build_graph(doc, PipelineConfig{});  // positional term keeps weights > 0
  EXPECT_EQ(g.edge_count(), 3u);
}

TEST(BuildGraph, MatchesAllPairsTopK) {
  std::mt19937_64 gen(50);
  PipelineConfig cfg;
  cfg.k_neighbors = 4;
  const auto doc = oracle::random_document(gen, 50, 8);
  const auto g = build_graph(doc, cfg);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_GE(g.degree_meta(i).degree, 4u);
    EXPECT_LE(g.degree_meta(i).degree, 8u);
    for (std::size_t j : oracle::brute_top_k(doc, i, 4, cfg.lambda_sem, cfg.tau))
      EXPECT_TRUE(g.weight(i, j).has_value()) << i << " -> " << j;
  }
}

// Property: on random documents with n <= 64 the stored edge set is exactly
// the symmetric union of brute-force top-k lists, with symmetric weights in
// [0, 1] and correct degree metadata.
TEST(BuildGraph, PropertyExactSymmetricUnion) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 60; ++trial) {
    PipelineConfig cfg;
    cfg.k_neighbors = 1 + gen() % 8;
    cfg.lambda_sem = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    cfg.tau = std::uniform_real_distribution<double>(0.5, 10.0)(gen);
    const std::size_t n = 1 + gen() % 64;
    const auto doc = oracle::random_document(gen, n, 6);
    const auto g = build_graph(doc, cfg);

    std::set<std::pair<std::size_t, std::size_t>> expected;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j : oracle::brute_top_k(doc, i, cfg.k_neighbors, cfg.lambda_sem, cfg.tau))
        expected.insert({std::min(i, j), std::max(i, j)});
    ASSERT_EQ(g.edge_count(), expected.size());
    for (std::size_t i = 0; i < n; ++i) {
      double max_w = 0.0;
      for (const auto& e : g.neighbors(i)) {
        EXPECT_TRUE(expected.count({std::min(i, e.to), std::max(i, e.to)}));
        EXPECT_EQ(g.weight(e.to, i), e.weight);
        EXPECT_GE(e.weight, 0.0);
        EXPECT_LE(e.weight, 1.0);
        EXPECT_NEAR(e.weight,
                    static_cast<double>(oracle::weight(doc.tokens[i].embedding,
                                                       doc.tokens[e.to].embedding, long(i),
                                                       long(e.to), cfg.lambda_sem, cfg.tau)),
                    1e-14);
        max_w = std::max(max_w, e.weight);
      }
      EXPECT_EQ(g.degree_meta(i).degree, g.neighbors(i).size());
      EXPECT_EQ(g.degree_meta(i).max_weight, max_w);
    }
  }
}

TEST(RowNormalize, TwoNodeGraph) {
  TokenGraph g(2);
  g.add_edge(0, 1, 0.8);
  g.finalize();
  const auto p = row_normalize(g);
  ASSERT_EQ(p.rows[0].size(), 1u);
  EXPECT_EQ(p.rows[0][0], (Edge{1, 1.0}));
  EXPECT_EQ(p.rows[1][0], (Edge{0, 1.0}));
}

TEST(RowNormalize, IsolatedNodeGetsSelfLoop) {
  TokenGraph g(3);
  g.add_edge(0, 1, 0.5);
  g.finalize();
  const auto p = row_normalize(g);
  ASSERT_EQ(p.rows[2].size(), 1u);
  EXPECT_EQ(p.rows[2][0], (Edge{2, 1.0}));
}

TEST(RowNormalize, PathMiddleRow) {
  TokenGraph g(3);
  g.add_edge(0, 1, 0.6);
  g.add_edge(1, 2, 0.3);
  g.finalize();
  const auto p = row_normalize(g);
  ASSERT_EQ(p.rows[1].size(), 2u);
  EXPECT_NEAR(p.rows[1][0].weight, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.rows[1][1].weight, 1.0 / 3.0, 1e-15);
}

TEST(RowNormalize, RowsSumToOne) {
  std::mt19937_64 gen(9);
  for (int t = 0; t < 30; ++t) {
    const auto doc = oracle::random_document(gen, 2 + gen() % 60, 5);
    const auto p = row_normalize(build_graph(doc, PipelineConfig{}));
    for (const auto& row : p.rows) {
      double s = 0.0;
      for (const auto& e : row) s += e.weight;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

Document paired(std::mt19937_64& gen, std::size_t n, std::size_t m, std::size_t d) {
  Document doc = oracle::random_document(gen, n, d);
  doc.visual_tokens = oracle::random_tokens(gen, m, d);
  return doc;
}

TEST(CrossModalEdges, IdenticalPairHasUnitWeight) {
  std::mt19937_64 gen(4);
  Document doc = paired(gen, 3, 4, 5);
  (*doc.visual_tokens)[2].embedding = doc.tokens[1].embedding;
  const auto edges = cross_modal_edges(doc, PipelineConfig{});
  ASSERT_TRUE(edges.count({1, 2}));
  EXPECT_NEAR(edges.at({1, 2}), 1.0, 1e-15);
}

TEST(CrossModalEdges, OrthogonalModalitiesGiveEmptyMap) {
  Document doc;
  doc.id = "orth";
  doc.tokens = {{"a", {1, 0, 0, 0}, 0, {}}, {"b", {0, 1, 0, 0}, 1, {}}};
  doc.visual_tokens = std::vector<EmbeddedToken>{{"x", {0, 0, 1, 0}, 0, {}},
                                                 {"y", {0, 0, 0, 1}, 1, {}}};
  EXPECT_TRUE(cross_modal_edges(doc, PipelineConfig{}).empty());
}

TEST(CrossModalEdges, MissingVisualTokensIsAnError) {
  std::mt19937_64 gen(4);
  EXPECT_THROW(cross_modal_edges(oracle::random_document(gen, 3, 4), PipelineConfig{}), DataError);
}

TEST(CrossModalEdges, MatchesAllPairsTopK) {
  std::mt19937_64 gen(56);
  PipelineConfig cfg;
  cfg.k_cross = 2;
  for (int t = 0; t < 20; ++t) {
    const Document doc = paired(gen, 5, 6, 4);
    std::set<std::pair<std::size_t, std::size_t>> expected;
    for (std::size_t i = 0; i < 5; ++i) {
      std::vector<std::pair<long double, std::size_t>> all;
      for (std::size_t j = 0; j < 6; ++j) {
        long double c = 0;
        for (std::size_t k = 0; k < 4; ++k)
          c += static_cast<long double>(doc.tokens[i].embedding[k]) * (*doc.visual_tokens)[j].embedding[k];
        if (c > 0) all.push_back({c, j});
      }
      std::sort(all.begin(), all.end(), [](auto& a, auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      for (std::size_t r = 0; r < std::min<std::size_t>(2, all.size()); ++r)
        expected.insert({i, all[r].second});
    }
    const auto edges = cross_modal_edges(doc, cfg);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& [key, w] : edges) {
      got.insert(key);
      EXPECT_GT(w, 0.0);
      EXPECT_LE(w, 1.0);
    }
    EXPECT_EQ(got, expected);
  }
}

}  // namespace
}  // namespace tokcomp
