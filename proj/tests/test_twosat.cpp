#include <gtest/gtest.h>

#include <set>

#include "oracle.hpp"
#include "subsat/rng.hpp"
#include "subsat/twosat.hpp"

using namespace subsat;

namespace {

CnfFormula random_2cnf(std::size_t n, std::size_t m, Rng& rng) {
    std::vector<Clause> clauses;
    for (std::size_t i = 0; i < m; ++i) {
        const auto a = static_cast<std::uint32_t>(rng.below(n));
        auto b = static_cast<std::uint32_t>(rng.below(n));
        while (b == a) b = static_cast<std::uint32_t>(rng.below(n));
        clauses.push_back(Clause{{{a, rng.coin()}, {b, rng.coin()}}});
    }
    return {n, std::move(clauses)};
}

bool oracle_satisfiable(const CnfFormula& phi) {
    for (const auto& x : oracle::all_points(phi.n()))
        if (oracle::eval_cnf(phi, x)) return true;
    return false;
}

} // namespace

TEST(ImplicationGraph, EdgesOfOneClause) {
    CnfFormula phi(2, {Clause{{pos(0), pos(1)}}});
    auto g = implication_graph(phi);
    EXPECT_TRUE(g.has_edge(lit_node(neg(0)), lit_node(pos(1))));
    EXPECT_TRUE(g.has_edge(lit_node(neg(1)), lit_node(pos(0))));
    EXPECT_FALSE(g.contradictory);
}

TEST(ImplicationGraph, UnitClauseEdge) {
    CnfFormula phi(1, {Clause{{pos(0)}}});
    auto g = implication_graph(phi);
    EXPECT_TRUE(g.has_edge(lit_node(neg(0)), lit_node(pos(0))));
}

TEST(ImplicationGraph, OppositeUnitsContradict) {
    CnfFormula phi(1, {Clause{{pos(0)}}, Clause{{neg(0)}}});
    EXPECT_TRUE(implication_graph(phi).contradictory);
}

TEST(ImplicationGraph, RejectsWideClauses) {
    CnfFormula phi(3, {Clause{{pos(0), pos(1), pos(2)}}});
    EXPECT_THROW(implication_graph(phi), std::invalid_argument);
}

TEST(ImplicationGraph, SkewSymmetry) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = implication_graph(random_2cnf(8, 12, rng));
        for (std::uint32_t u = 0; u < 16; ++u)
            for (auto v : g.adj[u]) EXPECT_TRUE(g.has_edge(node_negate(v), node_negate(u)));
    }
}

TEST(ImplicationGraph, SccTestMatchesEnumeration) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + rng.below(7);
        CnfFormula phi = random_2cnf(n, n + rng.below(2 * n), rng);
        EXPECT_EQ(!implication_graph(phi).contradictory, oracle_satisfiable(phi));
    }
}

TEST(Canonical, SatisfiesWheneverSatisfiable) {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 3 + rng.below(9);
        CnfFormula phi = random_2cnf(n, 1 + rng.below(3 * n), rng);
        auto canon = canonical_assignment(phi);
        if (oracle_satisfiable(phi)) {
            ASSERT_TRUE(canon.has_value());
            EXPECT_TRUE(oracle::eval_cnf(phi, canon->assignment));
        } else {
            EXPECT_FALSE(canon.has_value());
        }
    }
}

TEST(Canonical, Deterministic) {
    Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        CnfFormula phi = random_2cnf(9, 14, rng);
        auto a = canonical_assignment(phi);
        auto b = canonical_assignment(phi);
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) {
            EXPECT_EQ(a->assignment, b->assignment);
            EXPECT_EQ(a->depth, b->depth);
            EXPECT_EQ(a->layers, b->layers);
        }
    }
}

TEST(Canonical, SinkExample) {
    // (~x1 v x2): x2 and ~x1 are sinks, so the canonical assignment is x1=0, x2=1
    CnfFormula phi(2, {Clause{{neg(0), pos(1)}}});
    auto canon = canonical_assignment(phi);
    ASSERT_TRUE(canon.has_value());
    EXPECT_TRUE(oracle::eval_cnf(phi, canon->assignment));
    EXPECT_EQ(canon->assignment, BitVec::from_string("01"));
    EXPECT_EQ(canon->depth[0], 0u);
    EXPECT_EQ(canon->depth[1], 0u);
}

TEST(Canonical, UniqueAssignmentIsCanonical) {
    // when the satisfying assignment is unique, every variable is critical
    // and the canonical assignment must equal it
    Rng rng(17);
    int found = 0;
    for (int trial = 0; trial < 400 && found < 25; ++trial) {
        const std::size_t n = 3 + rng.below(6);
        CnfFormula phi = random_2cnf(n, 2 * n + rng.below(n), rng);
        std::vector<BitVec> sols;
        for (const auto& x : oracle::all_points(n))
            if (oracle::eval_cnf(phi, x)) sols.push_back(x);
        if (sols.size() != 1) continue;
        bool all_critical = true;
        for (std::size_t v = 0; v < n && all_critical; ++v) {
            BitVec flipped = sols[0];
            flipped.flip(v);
            if (oracle::eval_cnf(phi, flipped)) all_critical = false;
        }
        if (!all_critical) continue;
        ++found;
        auto canon = canonical_assignment(phi);
        ASSERT_TRUE(canon.has_value());
        EXPECT_EQ(canon->assignment, sols[0]);
    }
    EXPECT_GE(found, 10);
}

TEST(Canonical, MergedComponentsHandled) {
    // (~a v b)(~b v a) makes a and b equivalent; formula is satisfiable
    CnfFormula phi(2, {Clause{{neg(0), pos(1)}}, Clause{{neg(1), pos(0)}}});
    auto canon = canonical_assignment(phi);
    ASSERT_TRUE(canon.has_value());
    EXPECT_TRUE(oracle::eval_cnf(phi, canon->assignment));
    EXPECT_EQ(canon->assignment.get(0), canon->assignment.get(1));
}

TEST(Canonical, UnusedVariablesAreZero) {
    CnfFormula phi(4, {Clause{{pos(1)}}});
    auto canon = canonical_assignment(phi);
    ASSERT_TRUE(canon.has_value());
    EXPECT_FALSE(canon->assignment.get(0));
    EXPECT_TRUE(canon->assignment.get(1));
    EXPECT_FALSE(canon->assignment.get(2));
    EXPECT_FALSE(canon->assignment.get(3));
    // untouched variables sit past the last layer
    EXPECT_EQ(canon->depth[0], canon->layers.size());
}

TEST(Canonical, DepthMatchesLayers) {
    Rng rng(19);
    for (int trial = 0; trial < 60; ++trial) {
        CnfFormula phi = random_2cnf(8, 10, rng);
        auto canon = canonical_assignment(phi);
        if (!canon) continue;
        for (std::size_t j = 0; j < canon->layers.size(); ++j) {
            for (auto node : canon->layers[j]) {
                EXPECT_EQ(canon->depth[node / 2], j);
                // the recorded literal is the true one
                EXPECT_EQ(canon->assignment.get(node / 2), node % 2 == 0);
            }
        }
    }
}

TEST(Canonical, EmptyClauseUnsatisfiable) {
    CnfFormula phi(2, {Clause{}});
    EXPECT_FALSE(canonical_assignment(phi).has_value());
}
