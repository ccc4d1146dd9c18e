#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "trasa/errors.hpp"
#include "trasa/graph/session_graph.hpp"

using namespace trasa::graph;
using trasa::testing::brute_edge_types;
using trasa::testing::brute_shortest_path;

namespace {

Session random_session(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> length(1, 12);
  std::uniform_int_distribution<std::size_t> alphabet(1, 8);
  const std::size_t n = length(rng);
  std::uniform_int_distribution<ItemId> item(0, alphabet(rng) - 1);
  Session s(n);
  for (auto& v : s) v = item(rng);
  return s;
}

}  // namespace

TEST(SessionGraph, WorkedExampleNodesAndReversion) {
  // Items 1..5 map to nodes 0..4 by first occurrence.
  const Session s{1, 2, 3, 4, 2, 5};
  const auto g = build_graph(s);
  EXPECT_EQ(g.nodes(), (std::vector<ItemId>{1, 2, 3, 4, 5}));
  EXPECT_EQ(revert_mapping(g), (std::vector<std::size_t>{0, 1, 2, 3, 1, 4}));
  EXPECT_EQ(g.edge(0, 1), EdgeType::kNxt);
  EXPECT_EQ(g.edge(1, 0), EdgeType::kPre);
  EXPECT_EQ(g.edge(3, 1), EdgeType::kNxt);
  EXPECT_EQ(g.edge(1, 3), EdgeType::kPre);
  EXPECT_EQ(g.edge(2, 4), std::nullopt);
}

TEST(SessionGraph, WorkedExampleLongRangePath) {
  // v3 -> v4 -> v2 -> v5, three forward clicks.
  const Session s{1, 2, 3, 4, 2, 5};
  const auto table = shortest_paths(build_graph(s));
  const auto& p = table.at(4, 2);
  EXPECT_EQ(p.from, 2u);
  EXPECT_EQ(p.to, 4u);
  EXPECT_EQ(p.length, 3u);
  EXPECT_EQ(p.edge_types, (std::vector<EdgeType>{EdgeType::kNxt, EdgeType::kNxt, EdgeType::kNxt}));
}

TEST(SessionGraph, BackAndForthBecomesNpl) {
  const Session s{1, 2, 1};
  const auto g = build_graph(s);
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.edge(0, 1), EdgeType::kNpl);
  EXPECT_EQ(g.edge(1, 0), EdgeType::kNpl);
  const auto table = shortest_paths(g);
  EXPECT_EQ(table.at(0, 1).edge_types, std::vector<EdgeType>{EdgeType::kNpl});
}

TEST(SessionGraph, SingletonHasOnlySelfPath) {
  const Session s{7};
  const auto g = build_graph(s);
  EXPECT_EQ(g.node_count(), 1u);
  EXPECT_EQ(g.edges().size(), 1u);
  EXPECT_EQ(g.edge(0, 0), EdgeType::kSelf);
  const auto table = shortest_paths(g);
  ASSERT_EQ(table.size(), 1u);
  EXPECT_EQ(table.at(0, 0).length, 1u);
  EXPECT_EQ(table.at(0, 0).edge_types, std::vector<EdgeType>{EdgeType::kSelf});
}

TEST(SessionGraph, RepeatedClickAddsNoEdge) {
  const Session s{3, 3, 4};
  const auto g = build_graph(s);
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.edges().size(), 4u);
  EXPECT_EQ(g.edge(0, 0), EdgeType::kSelf);
}

TEST(SessionGraph, EmptySessionIsContractError) {
  EXPECT_THROW(build_graph(Session{}), trasa::ContractError);
}

TEST(SessionGraph, EdgeNamesAreStable) {
  EXPECT_EQ(edge_type_name(EdgeType::kNxt), "NXT");
  EXPECT_EQ(edge_type_name(EdgeType::kPre), "PRE");
  EXPECT_EQ(edge_type_name(EdgeType::kNpl), "NPL");
  EXPECT_EQ(edge_type_name(EdgeType::kSelf), "SELF");
}

TEST(PathTable, PairIndexCoversUpperTriangle) {
  const std::size_t m = 5;
  std::vector<bool> seen(m * (m + 1) / 2, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const auto k = PathTable::pair_index(i, j, m);
      ASSERT_LT(k, seen.size());
      EXPECT_FALSE(seen[k]);
      seen[k] = true;
      EXPECT_EQ(PathTable::pair_index(j, i, m), k);
    }
  }
}

TEST(PathTable, LongPathsKeepEdgesNearestTheTarget) {
  Session s;
  for (ItemId i = 0; i < 20; ++i) s.push_back(i);
  const auto table = shortest_paths(build_graph(s), PathOptions{.cap = 4});
  const auto& p = table.at(0, 19);
  EXPECT_EQ(p.length, 19u);
  EXPECT_EQ(p.edge_types.size(), 4u);

  Session back{0, 1, 2, 3, 2};
  const auto t2 = shortest_paths(build_graph(back), PathOptions{.cap = 2});
  // 0 -> 1 -> 2 -> 3 with the last hop NPL; the cap keeps the final two.
  EXPECT_EQ(t2.at(0, 3).edge_types, (std::vector<EdgeType>{EdgeType::kNxt, EdgeType::kNpl}));
}

TEST(PathTable, ZeroCapIsRejected) {
  const Session s{1, 2};
  EXPECT_THROW(shortest_paths(build_graph(s), PathOptions{.cap = 0}), trasa::ContractError);
}

TEST(PathTable, RandomSessionsMatchBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Session s = random_session(rng);
    const auto g = build_graph(s);
    const auto types = brute_edge_types(s);
    const std::size_t m = g.node_count();
    ASSERT_EQ(types.size(), m);

    std::size_t edges = 0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        const auto e = g.edge(a, b);
        if (types[a][b] < 0) {
          EXPECT_FALSE(e.has_value());
        } else {
          ASSERT_TRUE(e.has_value());
          EXPECT_EQ(static_cast<int>(*e), types[a][b]);
          ++edges;
        }
        if (e == EdgeType::kNpl) {
          EXPECT_EQ(g.edge(b, a), EdgeType::kNpl);
        }
      }
      EXPECT_EQ(g.edge(a, a), EdgeType::kSelf);
    }
    EXPECT_EQ(edges, g.edges().size());
    EXPECT_LE(g.edges().size(), m + 2 * (s.size() - 1));

    std::vector<ItemId> reverted;
    for (auto node : revert_mapping(g)) reverted.push_back(g.nodes()[node]);
    EXPECT_EQ(reverted, s);

    for (bool pre : {false, true}) {
      const auto table = shortest_paths(g, PathOptions{.cap = 64, .traverse_pre = pre});
      ASSERT_EQ(table.size(), m * (m + 1) / 2);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
          const auto expected = brute_shortest_path(s, i, j, pre);
          const auto& got = table.at(j, i);
          EXPECT_EQ(got.from, i);
          EXPECT_EQ(got.to, j);
          EXPECT_EQ(got.length, expected.length) << "trial " << trial << " pair " << i << "," << j;
          EXPECT_EQ(got.edge_types, expected.edge_types) << "trial " << trial;
        }
      }
    }
  }
}
