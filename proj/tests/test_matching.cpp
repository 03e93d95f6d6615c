#include <gtest/gtest.h>

#include <random>

#include "kkmcut/matching.hpp"
#include "oracles.hpp"

using namespace kkmcut;

namespace {

BipartiteGraph complete(std::size_t n, std::size_t m) {
    BipartiteGraph g(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            g.add_edge(i, j);
    return g;
}

} // namespace

TEST(Quota, ValidatesEntries) {
    EXPECT_THROW(make_quota({1, 0}, 1), InvalidInput);
    EXPECT_THROW(make_quota({1, 2}, 4), InvalidInput);
    EXPECT_EQ(make_quota({1, 2}).target, 3u);
}

TEST(Quota, CompositionsAreLexicographic) {
    auto c = compositions(4, 2);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0].a, (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(c[2].a, (std::vector<std::size_t>{3, 1}));
    EXPECT_TRUE(compositions(2, 3).empty());
    EXPECT_EQ(compositions(6, 3).size(), 10u);
}

TEST(Graph, RejectsDuplicateAndOutOfRangeEdges) {
    BipartiteGraph g(2, 2);
    g.add_edge(0, 1);
    EXPECT_THROW(g.add_edge(0, 1), InvalidInput);
    EXPECT_THROW(g.add_edge(2, 0), IndexOutOfRange);
}

TEST(QuotaMatching, CompleteGraphSmallestIndexFirst) {
    auto r = quota_matching(complete(2, 3), make_quota({1, 2}));
    ASSERT_TRUE(std::holds_alternative<Assignment>(r));
    EXPECT_EQ(std::get<Assignment>(r).sigma, (std::vector<std::size_t>{0, 1, 1}));
}

TEST(QuotaMatching, IsolatedVertexIsTheViolator) {
    BipartiteGraph g(2, 3, {{0, 0}, {0, 1}, {0, 2}});
    auto r = quota_matching(g, make_quota({1, 2}));
    ASSERT_TRUE(std::holds_alternative<Infeasible>(r));
    const auto& bad = std::get<Infeasible>(r);
    EXPECT_EQ(bad.subset, (std::vector<std::size_t>{1}));
    EXPECT_EQ(bad.neighborhood, 0u);
    EXPECT_EQ(bad.demand, 2u);
}

TEST(QuotaMatching, ForcedAssignment) {
    BipartiteGraph g(2, 3, {{0, 0}, {1, 0}, {1, 1}, {1, 2}});
    auto r = quota_matching(g, make_quota({1, 2}));
    ASSERT_TRUE(std::holds_alternative<Assignment>(r));
    EXPECT_EQ(std::get<Assignment>(r).sigma, (std::vector<std::size_t>{0, 1, 1}));
}

TEST(QuotaMatching, RejectsMismatchedQuota) {
    EXPECT_THROW(quota_matching(complete(2, 3), make_quota({1, 1})), InvalidInput);
}

TEST(HallCheck, Examples) {
    EXPECT_TRUE(check_hall_quota(complete(2, 3), make_quota({1, 2})));
    EXPECT_FALSE(check_hall_quota(BipartiteGraph(2, 3, {{0, 0}, {0, 1}, {0, 2}}), make_quota({1, 2})));
    EXPECT_FALSE(check_hall_quota(BipartiteGraph(2, 3), make_quota({1, 2})));
    EXPECT_FALSE(check_hall_quota(BipartiteGraph(3, 3), make_quota({1, 1, 1})));
    EXPECT_THROW(check_hall_quota(BipartiteGraph(21, 21), make_quota(std::vector<std::size_t>(21, 1))), TooLarge);
}

TEST(QuotaMatching, AgreesWithMapEnumerationOnRandomGraphs) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 400; ++trial) {
        std::size_t n = 1 + rng() % 4, m = n + rng() % 3;
        BipartiteGraph g(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (rng() % 2)
                    g.add_edge(i, j);
        for (const auto& a : compositions(m, n)) {
            bool brute = kkmcut::testing::brute_quota_feasible(g, a);
            auto r = quota_matching(g, a);
            EXPECT_EQ(std::holds_alternative<Assignment>(r), brute);
            EXPECT_EQ(check_hall_quota(g, a), brute);
            if (auto* s = std::get_if<Assignment>(&r)) {
                EXPECT_TRUE(is_valid_assignment(g, a, *s));
            } else {
                const auto& bad = std::get<Infeasible>(r);
                std::size_t demand = 0;
                for (auto i : bad.subset)
                    demand += a[i];
                EXPECT_LT(kkmcut::testing::brute_neighborhood(g, bad.subset), demand);
            }
        }
    }
}

TEST(HMatching, CompleteHypergraphs) {
    EXPECT_EQ(max_hypergraph_matching(complete_hypergraph(2, 2)).size(), 2u);
    EXPECT_EQ(max_hypergraph_matching(complete_hypergraph(3, 3)).size(), 3u);
    Hypergraph one{3, 4, {{1, 2, 3}}, std::nullopt};
    EXPECT_EQ(max_hypergraph_matching(one).size(), 1u);
}

TEST(HMatching, ConflictMeansSharedCoordinate) {
    EXPECT_TRUE(edges_conflict({0, 1, 2}, {0, 2, 1}));
    EXPECT_FALSE(edges_conflict({0, 1, 2}, {1, 2, 0}));
    Hypergraph h{2, 2, {{0, 0}, {0, 1}}, std::nullopt};
    EXPECT_FALSE(is_matching(h, HMatching{{0, 1}}));
    EXPECT_TRUE(is_matching(h, HMatching{{1}}));
}

TEST(HMatching, MaximumAgainstSubsetEnumeration) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t r = 2 + rng() % 3, n = 2 + rng() % 3;
        auto full = complete_hypergraph(n, r);
        std::shuffle(full.edges.begin(), full.edges.end(), rng);
        Hypergraph h{r, n, {}, std::nullopt};
        std::size_t e = 1 + rng() % std::min<std::size_t>(12, full.edges.size());
        h.edges.assign(full.edges.begin(), full.edges.begin() + static_cast<std::ptrdiff_t>(e));
        auto mm = max_hypergraph_matching(h);
        EXPECT_TRUE(is_matching(h, mm));
        EXPECT_EQ(mm.size(), kkmcut::testing::brute_max_matching(h));
    }
}

TEST(HMatching, Limits) {
    Hypergraph big{4, 17, {}, std::nullopt};
    EXPECT_THROW(max_hypergraph_matching(big), TooLarge);
}

TEST(FractionalMatching, UniformWeightsOnCompleteHypergraph) {
    for (std::size_t n = 1; n <= 4; ++n)
        for (std::size_t r = 2; r <= 3; ++r) {
            auto h = complete_hypergraph(n, r);
            h.weights = std::vector<double>(h.edges.size(), 1.0 / std::pow(static_cast<double>(n), r));
            EXPECT_TRUE(verify_fractional_matching(h, n));
        }
}

TEST(FractionalMatching, DiagonalAndDeficientWeights) {
    auto h = complete_hypergraph(2, 2);  // edges (0,0),(0,1),(1,0),(1,1)
    h.weights = std::vector<double>{0.5, 0.0, 0.0, 0.5};
    EXPECT_TRUE(verify_fractional_matching(h, 2));
    h.weights = std::vector<double>{0.45, 0.0, 0.0, 0.45};
    EXPECT_FALSE(verify_fractional_matching(h, 2));
    h.weights.reset();
    EXPECT_THROW(verify_fractional_matching(h, 2), MissingWeights);
}

TEST(FractionalMatching, GeneratedInstancesAreValid) {
    std::mt19937_64 rng(3);
    for (std::size_t n = 2; n <= 4; ++n)
        for (int t = 0; t < 20; ++t)
            EXPECT_TRUE(verify_fractional_matching(kkmcut::testing::random_fractional_matching(rng, n), n));
}

TEST(FractionalMatching, Bound) {
    EXPECT_EQ(fractional_matching_bound(3, 3), 2u);
    EXPECT_EQ(fractional_matching_bound(4, 3), 2u);
    EXPECT_EQ(fractional_matching_bound(5, 2), 5u);
    EXPECT_THROW(fractional_matching_bound(3, 1), InvalidInput);
}
