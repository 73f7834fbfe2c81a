#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracle.hpp"
#include "subsat/maxsat.hpp"
#include "subsat/reductions.hpp"
#include "subsat/rng.hpp"

using namespace subsat;

namespace {

SubSatInstance random_instance(std::size_t n, std::size_t k, std::size_t m, std::size_t t, Rng& rng) {
    std::vector<Clause> clauses;
    for (std::size_t ci = 0; ci < m; ++ci) {
        Clause c;
        std::set<std::uint32_t> vars;
        while (vars.size() < k) vars.insert(static_cast<std::uint32_t>(rng.below(n)));
        for (auto v : vars) c.lits.push_back({v, rng.coin()});
        clauses.push_back(std::move(c));
    }
    LinearSystem sys(n);
    for (std::size_t i = 0; i < t; ++i) sys.add_row({BitVec::random(n, rng), rng.coin()});
    auto space = AffineSubspace::from_system(sys);
    if (!space) return random_instance(n, k, m, t, rng);
    return SubSatInstance(CnfFormula(n, std::move(clauses)), std::move(*space));
}

std::size_t oracle_optimum(const SubSatInstance& inst) {
    std::size_t best = 0;
    for (const auto& x : oracle::all_points(inst.n())) {
        if (!oracle::satisfies_system(inst.space->system(), x)) continue;
        best = std::max(best, oracle::count_satisfied(inst.phi, x));
    }
    return best;
}

double dyadic_value(const Dyadic& d) { return d.value(); }

} // namespace

TEST(PreprocessForced, FixesForcedVariable) {
    LinearSystem sys(3);
    sys.add_row(AffineForm::var(3, 0) + AffineForm::one(3));  // x1 = 1
    SubSatInstance inst(CnfFormula(3, {Clause{{pos(0), pos(1)}}, Clause{{neg(0), pos(2)}}}),
                        AffineSubspace::from_system(sys));
    auto pre = preprocess_forced(inst);
    ASSERT_EQ(pre.fixed.size(), 1u);
    EXPECT_EQ(pre.fixed[0], (std::pair<std::size_t, bool>{0, true}));
    EXPECT_EQ(pre.satisfied_clauses, 1u);  // (x1 v x2) is already true
    EXPECT_EQ(pre.reduced.n(), 2u);
    ASSERT_EQ(pre.reduced.phi.num_clauses(), 1u);
    EXPECT_EQ(pre.reduced.phi.clauses()[0].width(), 1u);  // (~x1 v x3) shrank to (x3)
}

TEST(PreprocessForced, IdentityWhenNothingForced) {
    Rng rng(3);
    LinearSystem sys(4);
    AffineForm row(4, false);
    row.coeffs.set(0, true);
    row.coeffs.set(1, true);
    sys.add_row(row);
    SubSatInstance inst(CnfFormula(4, {Clause{{pos(2), pos(3)}}}), AffineSubspace::from_system(sys));
    auto pre = preprocess_forced(inst);
    EXPECT_TRUE(pre.fixed.empty());
    EXPECT_EQ(pre.reduced.n(), 4u);
    EXPECT_EQ(pre.reduced.phi.num_clauses(), 1u);
}

TEST(PreprocessForced, LiftPreservesCounts) {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        SubSatInstance inst = random_instance(7, 2, 8, 3, rng);
        auto pre = preprocess_forced(inst);
        for (const auto& y : oracle::instance_solutions(pre.reduced)) {
            BitVec x = pre.lift(y);
            EXPECT_TRUE(inst.space->contains(x));
            EXPECT_EQ(oracle::count_satisfied(inst.phi, x),
                      pre.satisfied_clauses + oracle::count_satisfied(pre.reduced.phi, y));
        }
    }
}

TEST(ClauseProbability, FullPlaneBinaryClause) {
    Clause c{{pos(0), pos(1)}};
    Dyadic p = clause_sat_probability(c, AffineSubspace::full(2));
    EXPECT_EQ(p.num, 3u);
    EXPECT_EQ(p.log2_den, 2u);
}

TEST(ClauseProbability, ForcedClauseIsCertain) {
    LinearSystem sys(1);
    sys.add_row(AffineForm::var(1, 0) + AffineForm::one(1));
    Dyadic p = clause_sat_probability(Clause{{pos(0)}}, *AffineSubspace::from_system(sys));
    EXPECT_EQ(dyadic_value(p), 1.0);
}

TEST(ClauseProbability, MatchesEnumeratedFractionExactly) {
    Rng rng(7);
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = 4 + rng.below(5);
        SubSatInstance inst = random_instance(n, 2, 1, rng.below(3), rng);
        const auto& space = *inst.space;
        const Clause& c = inst.phi.clauses()[0];
        std::uint64_t sat = 0, total = 0;
        for (const auto& x : oracle::all_points(n)) {
            if (!oracle::satisfies_system(space.system(), x)) continue;
            ++total;
            if (oracle::eval_clause(c, x)) ++sat;
        }
        Dyadic p = clause_sat_probability(c, space);
        // exact equality of fractions: sat / total == num / 2^den
        EXPECT_EQ(sat << p.log2_den, p.num * total);
    }
}

TEST(ApproxMax, DerandomizedNeverBelowCeilOfExpectation) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        SubSatInstance inst = random_instance(8, 2, 10, 2, rng);
        MaxResult res = approx_max_derand(inst);
        EXPECT_TRUE(inst.space->contains(res.assignment));
        EXPECT_EQ(res.satisfied, inst.phi.count_satisfied(res.assignment));
        EXPECT_GE(static_cast<double>(res.satisfied) + 1e-9, std::ceil(res.bound - 1e-9));
        EXPECT_LE(res.satisfied, oracle_optimum(inst));
    }
}

TEST(ApproxMax, AtLeastHalfOfOptimum) {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        SubSatInstance inst = random_instance(8, 2, 9, 2, rng);
        MaxResult res = approx_max_derand(inst);
        EXPECT_GE(2 * res.satisfied, oracle_optimum(inst));
    }
}

TEST(ApproxMax, E2FullSpaceMeetsThreeQuarters) {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        SubSatInstance inst = random_instance(8, 2, 11, 0, rng);
        MaxResult res = approx_max_derand(inst);
        const std::size_t m = inst.phi.num_clauses();
        EXPECT_GE(res.satisfied, static_cast<std::size_t>(std::ceil(3.0 * static_cast<double>(m) / 4.0 - 1e-9)));
    }
}

TEST(ApproxMax, AllClausesSatisfiedOnSpace) {
    LinearSystem sys(2);
    sys.add_row(AffineForm::var(2, 0) + AffineForm::one(2));  // x1 = 1
    SubSatInstance inst(CnfFormula(2, {Clause{{pos(0)}}, Clause{{pos(0), pos(1)}}}), AffineSubspace::from_system(sys));
    MaxResult res = approx_max_derand(inst);
    EXPECT_EQ(res.satisfied, 2u);
}

TEST(ApproxMax, RandomAssignmentLandsInSpace) {
    Rng rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        SubSatInstance inst = random_instance(7, 2, 8, 2, rng);
        Rng sample(rng.next());
        MaxResult res = approx_max_random(inst, sample);
        EXPECT_TRUE(inst.space->contains(res.assignment));
        EXPECT_EQ(res.satisfied, inst.phi.count_satisfied(res.assignment));
    }
}

TEST(ExactMax, Examples) {
    // contradictory units: optimum is 1 on any space
    SubSatInstance inst = SubSatInstance::free_space(CnfFormula(1, {Clause{{pos(0)}}, Clause{{neg(0)}}}));
    auto [best, arg] = exact_max(inst);
    EXPECT_EQ(best, 1u);
    EXPECT_EQ(inst.phi.count_satisfied(arg), 1u);
}

TEST(ExactMax, StableAcrossRepeats) {
    Rng rng(23);
    SubSatInstance inst = random_instance(8, 2, 9, 1, rng);
    auto a = exact_max(inst);
    auto b = exact_max(inst);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.first, oracle_optimum(inst));
}

TEST(ThreeQuarters, AllUnarySatisfiable) {
    SubSatInstance inst = SubSatInstance::free_space(CnfFormula(3, {Clause{{pos(0)}}, Clause{{neg(1)}}, Clause{{pos(2)}}}));
    auto res = satisfiable_threequarters(inst);
    ASSERT_TRUE(res.has_value());
    EXPECT_EQ(res->satisfied, 3u);
    EXPECT_EQ(res->absorbed_unary, 3u);
    EXPECT_EQ(res->residual_clauses, 0u);
}

TEST(ThreeQuarters, PremiseViolationDetected) {
    // the unary clause contradicts the space
    LinearSystem sys(1);
    sys.add_row(AffineForm::var(1, 0));  // x1 = 0
    SubSatInstance inst(CnfFormula(1, {Clause{{pos(0)}}}), AffineSubspace::from_system(sys));
    EXPECT_FALSE(satisfiable_threequarters(inst).has_value());
}

TEST(ThreeQuarters, MixedInstanceMeetsGuarantee) {
    // unary clauses + binary clauses, consistent
    CnfFormula phi(4, {Clause{{pos(0)}}, Clause{{neg(0), pos(1)}}, Clause{{pos(2), pos(3)}}, Clause{{neg(2), pos(3)}}});
    SubSatInstance inst = SubSatInstance::free_space(phi);
    ASSERT_FALSE(oracle::instance_solutions(inst).empty());
    auto res = satisfiable_threequarters(inst);
    ASSERT_TRUE(res.has_value());
    const std::size_t m1 = res->absorbed_unary;
    const std::size_t m2 = res->residual_clauses;
    EXPECT_EQ(m1 + m2, phi.num_clauses());
    EXPECT_GE(res->satisfied, m1 + static_cast<std::size_t>(std::ceil(3.0 * static_cast<double>(m2) / 4.0 - 1e-9)));
}

TEST(ThreeQuarters, RandomSatisfiableFullSpaceInstances) {
    Rng rng(29);
    int exercised = 0;
    for (int trial = 0; trial < 300 && exercised < 40; ++trial) {
        const std::size_t n = 5 + rng.below(4);
        std::vector<Clause> clauses;
        const std::size_t m = 4 + rng.below(8);
        for (std::size_t ci = 0; ci < m; ++ci) {
            Clause c;
            const std::size_t w = 1 + rng.below(2);
            std::set<std::uint32_t> vars;
            while (vars.size() < w) vars.insert(static_cast<std::uint32_t>(rng.below(n)));
            for (auto v : vars) c.lits.push_back({v, rng.coin()});
            clauses.push_back(std::move(c));
        }
        SubSatInstance inst = SubSatInstance::free_space(CnfFormula(n, std::move(clauses)));
        if (oracle::instance_solutions(inst).empty()) continue;
        ++exercised;
        auto res = satisfiable_threequarters(inst);
        ASSERT_TRUE(res.has_value());
        const std::size_t m1 = res->absorbed_unary;
        const std::size_t m2 = res->residual_clauses;
        EXPECT_GE(res->satisfied, m1 + static_cast<std::size_t>(std::ceil(3.0 * static_cast<double>(m2) / 4.0 - 1e-9)));
        EXPECT_LE(res->satisfied, oracle_optimum(inst));
        EXPECT_GE(4 * res->satisfied, 3 * oracle_optimum(inst));  // factor 3/4 of the optimum
    }
    EXPECT_GE(exercised, 30);
}

TEST(Dyadic, ValueConversion) {
    Dyadic p{3, 2};
    EXPECT_DOUBLE_EQ(p.value(), 0.75);
    EXPECT_DOUBLE_EQ(Dyadic::one().value(), 1.0);
}
