#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subsat/cnf.hpp"
#include "subsat/f2.hpp"
#include "subsat/instance.hpp"
#include "subsat/rng.hpp"

namespace subsat {

/// Exact dyadic probability num / 2^log2_den.
struct Dyadic {
    std::uint64_t num = 0;
    unsigned log2_den = 0;

    double value() const { return static_cast<double>(num) / std::exp2(static_cast<double>(log2_den)); }

    static Dyadic one() { return {1, 0}; }
};

struct MaxResult {
    BitVec assignment;
    std::size_t satisfied = 0;  // clause count on the original formula
    double bound = 0.0;         // guaranteed (derandomized) or expected (random) count
    std::size_t absorbed_unary = 0;    // set by satisfiable_threequarters
    std::size_t residual_clauses = 0;  // set by satisfiable_threequarters
};

// ---------------------------------------------------------------------------
// Forced-variable preprocessing.

/// The instance with every variable that is constant on A set and removed.
/// Clauses satisfied or falsified outright are moved into counters; the rest
/// are reindexed over the surviving variables.
struct ForcedReduction {
    SubSatInstance reduced;
    std::vector<std::pair<std::size_t, bool>> fixed;  // (original variable, value), ascending
    std::size_t satisfied_clauses = 0;
    std::size_t falsified_clauses = 0;

    BitVec lift(BitVec reduced_point) const {
        for (const auto& [var, val] : fixed) reduced_point = reduced_point.inserted(var, val);
        return reduced_point;
    }
};

inline ForcedReduction preprocess_forced(const SubSatInstance& inst) {
    if (!inst.space) throw std::invalid_argument("preprocess_forced: space is empty");
    const std::size_t n = inst.n();
    ForcedReduction out;
    std::vector<int> forced(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        switch (inst.space->implied_value(AffineForm::var(n, i))) {
            case AffineSubspace::Implied::Zero: forced[i] = 0; break;
            case AffineSubspace::Implied::One: forced[i] = 1; break;
            case AffineSubspace::Implied::Free: break;
        }
    }
    std::vector<std::size_t> new_index(n, 0);
    std::size_t survivors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (forced[i] >= 0) {
            out.fixed.emplace_back(i, forced[i] == 1);
        } else {
            new_index[i] = survivors++;
        }
    }

    std::vector<Clause> clauses;
    for (const auto& c : inst.phi.clauses()) {
        Clause nc;
        bool sat = false;
        for (const auto& l : c.lits) {
            if (forced[l.var] >= 0) {
                if (l.value_under(forced[l.var] == 1)) {
                    sat = true;
                    break;
                }
                continue;
            }
            nc.lits.push_back({static_cast<std::uint32_t>(new_index[l.var]), l.neg});
        }
        if (sat) {
            ++out.satisfied_clauses;
        } else if (nc.lits.empty() && !c.lits.empty()) {
            ++out.falsified_clauses;
        } else {
            clauses.push_back(std::move(nc));
        }
    }

    LinearSystem sys(survivors);
    for (const auto& row : inst.space->system().rows) {
        AffineForm nr(survivors);
        nr.constant = row.constant;
        for (std::size_t i = 0; i < n; ++i) {
            if (!row.coeffs.get(i)) continue;
            if (forced[i] >= 0)
                nr.constant ^= forced[i] == 1;
            else
                nr.coeffs.set(new_index[i], true);
        }
        if (nr.coeffs.any()) sys.add_row(std::move(nr));
        // rows fully supported on forced variables reduce to 0 = 0
    }
    auto space = AffineSubspace::from_system(sys);
    out.reduced = SubSatInstance(CnfFormula(survivors, std::move(clauses)), std::move(*space));
    return out;
}

// ---------------------------------------------------------------------------
// Exact clause probabilities on a subspace.

namespace maxdetail {

// Rank of the falsifying system {form = 0 for each form}, with forms given
// over free coordinates and `fixed` coordinates substituted. Returns nullopt
// when the system is inconsistent (the clause cannot be falsified).
inline std::optional<unsigned> falsify_rank(const std::vector<AffineForm>& forms,
                                            const std::vector<int>& fixed) {
    std::vector<AffineForm> rows;
    for (const auto& f : forms) {
        AffineForm g = f;
        for (std::size_t i = 0; i < fixed.size(); ++i) {
            if (fixed[i] >= 0 && g.coeffs.get(i)) {
                g.coeffs.set(i, false);
                g.constant ^= fixed[i] == 1;
            }
        }
        for (const auto& r : rows) {
            const std::size_t p = r.coeffs.first_set();
            if (g.coeffs.get(p)) g += r;
        }
        if (g.is_constant()) {
            if (g.constant) return std::nullopt;  // form is 1 under the restriction
            continue;
        }
        rows.push_back(std::move(g));
    }
    return static_cast<unsigned>(rows.size());
}

// P[clause satisfied] on the restriction, exactly.
inline Dyadic clause_prob(const std::vector<AffineForm>& forms, const std::vector<int>& fixed) {
    auto rank = falsify_rank(forms, fixed);
    if (!rank) return Dyadic::one();
    // 1 - 2^{-rank}
    return Dyadic{(std::uint64_t{1} << *rank) - 1, *rank};
}

// Sum of clause probabilities scaled by 2^scale (exact).
inline unsigned __int128 expected_scaled(const std::vector<std::vector<AffineForm>>& clause_forms,
                                         const std::vector<int>& fixed, unsigned scale) {
    unsigned __int128 total = 0;
    for (const auto& forms : clause_forms) {
        const Dyadic p = clause_prob(forms, fixed);
        total += static_cast<unsigned __int128>(p.num) << (scale - p.log2_den);
    }
    return total;
}

inline std::vector<std::vector<AffineForm>> restricted_clause_forms(const CnfFormula& phi,
                                                                    const AffineSubspace::Parameterization& param) {
    std::vector<std::vector<AffineForm>> out;
    out.reserve(phi.num_clauses());
    for (const auto& c : phi.clauses()) {
        std::vector<AffineForm> forms;
        forms.reserve(c.lits.size());
        for (const auto& l : c.lits) forms.push_back(restrict_to_kernel(l.form(phi.n()), param));
        out.push_back(std::move(forms));
    }
    return out;
}

} // namespace maxdetail

/// Probability that a uniform point of the space satisfies the clause,
/// computed from the rank of the clause's falsifying conditions (exact, no
/// sampling).
inline Dyadic clause_sat_probability(const Clause& clause, const AffineSubspace& space) {
    auto param = space.parameterization();
    std::vector<AffineForm> forms;
    for (const auto& l : clause.lits) forms.push_back(restrict_to_kernel(l.form(space.n()), param));
    std::vector<int> fixed(space.dim(), -1);
    return maxdetail::clause_prob(forms, fixed);
}

/// Same, for a disjunction of affine forms over the space's ambient
/// coordinates.
inline Dyadic clause_sat_probability(const std::vector<AffineForm>& clause, const AffineSubspace& space) {
    auto param = space.parameterization();
    std::vector<AffineForm> forms;
    for (const auto& f : clause) forms.push_back(restrict_to_kernel(f, param));
    std::vector<int> fixed(space.dim(), -1);
    return maxdetail::clause_prob(forms, fixed);
}

// ---------------------------------------------------------------------------
// Approximation algorithms.

/// Uniform random point of A (after forced-variable preprocessing). `bound`
/// reports the expected satisfied count.
inline MaxResult approx_max_random(const SubSatInstance& inst, Rng& rng) {
    ForcedReduction pre = preprocess_forced(inst);
    const auto& space = *pre.reduced.space;
    auto param = space.parameterization();
    if (space.dim() > 62) throw std::length_error("approx_max_random: dimension too large for exact accounting");
    auto clause_forms = maxdetail::restricted_clause_forms(pre.reduced.phi, param);
    std::vector<int> fixed(space.dim(), -1);
    const auto scale = static_cast<unsigned>(space.dim());
    const double expected = static_cast<double>(maxdetail::expected_scaled(clause_forms, fixed, scale)) /
                            std::exp2(static_cast<double>(scale));

    BitVec coeffs = BitVec::random(space.dim(), rng);
    MaxResult out;
    out.assignment = pre.lift(point_from_coeffs(param, coeffs));
    out.satisfied = inst.phi.count_satisfied(out.assignment);
    out.bound = static_cast<double>(pre.satisfied_clauses) + expected;
    return out;
}

/// Method of conditional expectations over the kernel coefficients of A.
/// Each coefficient is fixed to whichever value maximizes the exact
/// conditional expected satisfied count (ties toward 0); the result
/// satisfies at least ceil(E) clauses where E is the unconditioned
/// expectation, reported in `bound`.
inline MaxResult approx_max_derand(const SubSatInstance& inst) {
    ForcedReduction pre = preprocess_forced(inst);
    const auto& space = *pre.reduced.space;
    auto param = space.parameterization();
    const std::size_t r = space.dim();
    if (r > 62) throw std::length_error("approx_max_derand: dimension too large for exact accounting");
    auto clause_forms = maxdetail::restricted_clause_forms(pre.reduced.phi, param);
    std::vector<int> fixed(r, -1);
    const auto scale = static_cast<unsigned>(r);
    const double expected = static_cast<double>(maxdetail::expected_scaled(clause_forms, fixed, scale)) /
                            std::exp2(static_cast<double>(scale));

    for (std::size_t i = 0; i < r; ++i) {
        fixed[i] = 0;
        const auto e0 = maxdetail::expected_scaled(clause_forms, fixed, scale);
        fixed[i] = 1;
        const auto e1 = maxdetail::expected_scaled(clause_forms, fixed, scale);
        fixed[i] = e1 > e0 ? 1 : 0;  // ties toward 0
    }
    BitVec coeffs(r);
    for (std::size_t i = 0; i < r; ++i)
        if (fixed[i] == 1) coeffs.set(i, true);

    MaxResult out;
    out.assignment = pre.lift(point_from_coeffs(param, coeffs));
    out.satisfied = inst.phi.count_satisfied(out.assignment);
    out.bound = static_cast<double>(pre.satisfied_clauses) + expected;
    return out;
}

/// Exact optimum by enumeration of A (test oracle).
inline std::pair<std::size_t, BitVec> exact_max(const SubSatInstance& inst, unsigned cap = kDefaultEnumCap) {
    if (!inst.space) throw std::invalid_argument("exact_max: space is empty");
    std::size_t best = 0;
    BitVec arg(inst.n());
    bool first = true;
    for_each_point(
        *inst.space,
        [&](const BitVec& x) {
            const std::size_t s = inst.phi.count_satisfied(x);
            if (first || s > best) {
                best = s;
                arg = x;
                first = false;
            }
            return true;
        },
        cap);
    return {best, arg};
}

/// For satisfiable instances: absorbs unary clauses (including those that
/// appear as other clauses shrink) into the subspace as affine conditions,
/// then derandomizes on the residual. Returns nullopt when absorption
/// empties the space or kills a clause outright, i.e. the satisfiability
/// premise was violated.
inline std::optional<MaxResult> satisfiable_threequarters(const SubSatInstance& inst) {
    if (!inst.space) return std::nullopt;
    const std::size_t m = inst.phi.num_clauses();
    AffineSubspace space = *inst.space;
    std::vector<Clause> live(inst.phi.clauses());
    std::size_t absorbed = 0;

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<AffineForm> pins;
        std::vector<Clause> rest;
        for (auto& c : live) {
            if (c.lits.size() == 1) {
                const Literal l = c.lits[0];
                // x_var = !neg, as the row x_var + !neg = 0
                pins.push_back({BitVec::unit(inst.n(), l.var), !l.neg});
                ++absorbed;
                changed = true;
            } else {
                rest.push_back(std::move(c));
            }
        }
        live = std::move(rest);
        if (!pins.empty()) {
            auto strengthened = space.intersect(pins);
            if (!strengthened) return std::nullopt;  // premise violated
            space = std::move(*strengthened);
        }

        // fold implied literal values into the remaining clauses
        std::vector<Clause> next;
        for (auto& c : live) {
            Clause nc;
            bool sat = false;
            for (const auto& l : c.lits) {
                switch (space.implied_value(l.form(inst.n()))) {
                    case AffineSubspace::Implied::One: sat = true; break;
                    case AffineSubspace::Implied::Zero: break;  // literal dead
                    case AffineSubspace::Implied::Free: nc.lits.push_back(l); break;
                }
                if (sat) break;
            }
            if (sat) {
                changed = true;  // clause true on the whole strengthened space
                continue;
            }
            if (nc.lits.empty() && !c.lits.empty()) return std::nullopt;  // clause dead on the space
            if (nc.lits.size() != c.lits.size()) changed = true;
            next.push_back(std::move(nc));
        }
        live = std::move(next);
    }

    SubSatInstance residual(CnfFormula(inst.n(), live), space);
    MaxResult out = approx_max_derand(residual);
    out.satisfied = inst.phi.count_satisfied(out.assignment);
    out.absorbed_unary = absorbed;
    out.residual_clauses = m - absorbed;
    out.bound = static_cast<double>(absorbed) + 0.75 * static_cast<double>(m - absorbed);
    return out;
}

} // namespace subsat
