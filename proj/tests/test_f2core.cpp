#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oracle.hpp"
#include "subsat/f2.hpp"
#include "subsat/rng.hpp"

using namespace subsat;

namespace {

LinearSystem random_system(std::size_t rows, std::size_t n, Rng& rng) {
    LinearSystem sys(n);
    for (std::size_t i = 0; i < rows; ++i) sys.add_row({BitVec::random(n, rng), rng.coin()});
    return sys;
}

AffineForm form_of(std::size_t n, std::initializer_list<std::size_t> vars, bool constant) {
    AffineForm f(n, constant);
    for (auto v : vars) f.coeffs.set(v, true);
    return f;
}

} // namespace

TEST(BitVec, BasicOps) {
    BitVec v(70);
    EXPECT_EQ(v.size(), 70u);
    v.set(0, true);
    v.set(69, true);
    EXPECT_TRUE(v.get(0));
    EXPECT_TRUE(v.get(69));
    EXPECT_FALSE(v.get(35));
    EXPECT_EQ(v.popcount(), 2u);
    EXPECT_THROW(v.get(70), std::out_of_range);
    EXPECT_THROW(v.set(71, true), std::out_of_range);

    BitVec w = BitVec::unit(70, 69);
    EXPECT_TRUE(v.dot(w));
    v ^= w;
    EXPECT_FALSE(v.get(69));
    EXPECT_EQ(v.first_set(), 0u);
}

TEST(BitVec, EraseInsertRoundTrip) {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        BitVec v = BitVec::random(11, rng);
        const std::size_t i = static_cast<std::size_t>(rng.below(11));
        const bool b = v.get(i);
        EXPECT_EQ(v.erased(i).inserted(i, b), v);
    }
}

TEST(Rref, AlreadyReduced) {
    // x1 = 0, x2 = 1
    LinearSystem sys(2);
    sys.add_row(form_of(2, {0}, false));
    sys.add_row(form_of(2, {1}, true));
    auto r = rref(sys);
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->rank(), 2u);
    EXPECT_EQ(r->pivots, (std::vector<std::size_t>{0, 1}));
}

TEST(Rref, ContradictoryPair) {
    // x1 + x2 = 0 and x1 + x2 = 1
    LinearSystem sys(2);
    sys.add_row(form_of(2, {0, 1}, false));
    sys.add_row(form_of(2, {0, 1}, true));
    EXPECT_FALSE(rref(sys).has_value());
}

TEST(Rref, PreservesSolutionSet) {
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        LinearSystem sys = random_system(4, 6, rng);
        auto r = rref(sys);
        auto naive = oracle::system_solutions(sys);
        if (!r) {
            EXPECT_TRUE(naive.empty());
            continue;
        }
        auto reduced = oracle::system_solutions(r->reduced);
        EXPECT_EQ(naive, reduced);
        EXPECT_FALSE(naive.empty());
    }
}

TEST(Rref, Idempotent) {
    Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        LinearSystem sys = random_system(5, 8, rng);
        auto r = rref(sys);
        if (!r) continue;
        auto again = rref(r->reduced);
        ASSERT_TRUE(again.has_value());
        EXPECT_EQ(again->reduced, r->reduced);
        EXPECT_EQ(again->pivots, r->pivots);
    }
}

TEST(AffineSubspace, FullSpaceParameterization) {
    auto a = AffineSubspace::full(3);
    auto p = a.parameterization();
    EXPECT_EQ(p.particular, BitVec(3));
    ASSERT_EQ(p.basis.size(), 3u);
    EXPECT_EQ(p.basis[0], BitVec::unit(3, 0));
    EXPECT_EQ(p.basis[1], BitVec::unit(3, 1));
    EXPECT_EQ(p.basis[2], BitVec::unit(3, 2));
}

TEST(AffineSubspace, SingleEquationParameterization) {
    // x1 + x2 = 1 in F2^2
    LinearSystem sys(2);
    sys.add_row(form_of(2, {0, 1}, true));
    auto a = AffineSubspace::from_system(sys);
    ASSERT_TRUE(a.has_value());
    auto p = a->parameterization();
    EXPECT_TRUE(p.particular.get(0) ^ p.particular.get(1));
    ASSERT_EQ(p.basis.size(), 1u);
    // kernel vector of x1 + x2
    EXPECT_FALSE(p.basis[0].get(0) ^ p.basis[0].get(1));
    EXPECT_TRUE(p.basis[0].any());
}

TEST(AffineSubspace, ParameterizationBijective) {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        auto a = AffineSubspace::from_system(random_system(2, 5, rng));
        if (!a) continue;
        auto p = a->parameterization();
        std::set<BitVec> seen;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << a->dim()); ++mask) {
            BitVec c(a->dim());
            for (std::size_t i = 0; i < a->dim(); ++i)
                if ((mask >> i) & 1) c.set(i, true);
            BitVec x = point_from_coeffs(p, c);
            EXPECT_TRUE(oracle::satisfies_system(a->system(), x));
            seen.insert(std::move(x));
        }
        EXPECT_EQ(seen.size(), std::size_t{1} << a->dim());
    }
}

TEST(AffineSubspace, ImpliedValueExamples) {
    LinearSystem sys(2);
    sys.add_row(form_of(2, {0}, true));  // x1 = 1
    auto a = AffineSubspace::from_system(sys);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->implied_value(AffineForm::var(2, 0)), AffineSubspace::Implied::One);
    EXPECT_EQ(a->implied_value(AffineForm::var(2, 1)), AffineSubspace::Implied::Free);
    EXPECT_THROW(a->implied_value(AffineForm::var(3, 0)), std::invalid_argument);
}

TEST(AffineSubspace, ImpliedValueMatchesEnumeration) {
    Rng rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        auto a = AffineSubspace::from_system(random_system(3, 6, rng));
        if (!a) continue;
        AffineForm f{BitVec::random(6, rng), rng.coin()};
        bool saw0 = false, saw1 = false;
        for (const auto& x : oracle::system_solutions(a->system()))
            (oracle::eval_form(f, x) ? saw1 : saw0) = true;
        auto implied = a->implied_value(f);
        if (saw0 && saw1)
            EXPECT_EQ(implied, AffineSubspace::Implied::Free);
        else if (saw1)
            EXPECT_EQ(implied, AffineSubspace::Implied::One);
        else
            EXPECT_EQ(implied, AffineSubspace::Implied::Zero);
    }
}

TEST(EliminateVariable, Example) {
    // x1 + x2 = 0, x1 + x3 = 1; eliminate x1 via row 0
    LinearSystem sys(3);
    sys.add_row(form_of(3, {0, 1}, false));
    sys.add_row(form_of(3, {0, 2}, true));
    LinearSystem out = eliminate_variable(sys, 0, 0);
    ASSERT_EQ(out.rows.size(), 1u);
    EXPECT_EQ(out.rows[0], form_of(3, {1, 2}, true));
}

TEST(EliminateVariable, SingleRowGivesFullSpace) {
    LinearSystem sys(2);
    sys.add_row(form_of(2, {0}, true));
    LinearSystem out = eliminate_variable(sys, 0, 0);
    EXPECT_TRUE(out.rows.empty());
}

TEST(EliminateVariable, PreconditionViolation) {
    LinearSystem sys(2);
    sys.add_row(form_of(2, {1}, false));
    EXPECT_THROW(eliminate_variable(sys, 0, 0), std::invalid_argument);
}

TEST(EliminateVariable, UniqueExtensionProperty) {
    Rng rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        LinearSystem sys = random_system(3, 5, rng);
        // pick a row/var pair with a nonzero coefficient
        std::size_t row = sys.rows.size(), var = 0;
        for (std::size_t r = 0; r < sys.rows.size() && row == sys.rows.size(); ++r)
            for (std::size_t v = 0; v < 5; ++v)
                if (sys.rows[r].coeffs.get(v)) {
                    row = r;
                    var = v;
                    break;
                }
        if (row == sys.rows.size()) continue;
        LinearSystem reduced = eliminate_variable(sys, var, row);
        for (const auto& y : oracle::system_solutions(reduced)) {
            int extensions = 0;
            for (int b = 0; b < 2; ++b) {
                BitVec x = y;
                x.set(var, b == 1);
                if (oracle::satisfies_system(sys, x)) ++extensions;
            }
            EXPECT_EQ(extensions, 1);
        }
    }
}

TEST(Enumeration, SinglePoint) {
    LinearSystem sys(3);
    sys.add_row(form_of(3, {0}, true));
    sys.add_row(form_of(3, {1}, false));
    sys.add_row(form_of(3, {2}, true));
    auto a = AffineSubspace::from_system(sys);
    ASSERT_TRUE(a);
    auto pts = enumerate_points(*a);
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_EQ(pts[0], BitVec::from_string("101"));
}

TEST(Enumeration, FullSpace) {
    auto pts = enumerate_points(AffineSubspace::full(3));
    EXPECT_EQ(pts.size(), 8u);
    std::set<BitVec> distinct(pts.begin(), pts.end());
    EXPECT_EQ(distinct.size(), 8u);
}

TEST(Enumeration, MembersOnlyAndDistinct) {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = AffineSubspace::from_system(random_system(2, 6, rng));
        if (!a || a->codim() != 2) continue;
        auto pts = enumerate_points(*a);
        EXPECT_EQ(pts.size(), 16u);
        std::set<BitVec> distinct;
        for (const auto& x : pts) {
            EXPECT_TRUE(oracle::satisfies_system(a->system(), x));
            distinct.insert(x);
        }
        EXPECT_EQ(distinct.size(), pts.size());
    }
}

TEST(Enumeration, CapExceeded) {
    auto a = AffineSubspace::full(8);
    EXPECT_THROW(enumerate_points(a, 6), std::length_error);
}

TEST(Enumeration, DeterministicOrder) {
    Rng rng(37);
    auto a = AffineSubspace::from_system(random_system(2, 7, rng));
    ASSERT_TRUE(a);
    EXPECT_EQ(enumerate_points(*a), enumerate_points(*a));
}
