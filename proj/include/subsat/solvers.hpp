#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subsat/cnf.hpp"
#include "subsat/f2.hpp"
#include "subsat/instance.hpp"
#include "subsat/rng.hpp"
#include "subsat/twosat.hpp"

namespace subsat {

enum class Verdict { Sat, Unsat, Unknown };

struct SolveStats {
    std::uint64_t iterations = 0;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
    std::string note;
};

/// Solver outcome. Sat always carries a witness that was re-verified against
/// the instance before return. Unsat comes only from exhaustive or
/// deterministic reasoning; a randomized search that runs out of budget
/// reports Unknown.
struct SolveResult {
    Verdict verdict = Verdict::Unknown;
    std::optional<BitVec> witness;
    SolveStats stats;
};

struct SolverBudget {
    double delta = 0.01;               // target failure probability of randomized solvers
    std::uint64_t max_iterations = 0;  // hard cap on the solver's primary counter; 0 = none
    std::uint64_t seed = 1;
    double nu = 0.5;       // plucking threshold
    double beta = 1.0;     // degree-reduction exponent
    double paf_density = 0.0;  // c with m <= c*n for degree reduction; 0 = derive from instance
    unsigned enum_cap = kDefaultEnumCap;
    unsigned det2_backstop_codim = 3;  // verify Unsat by enumeration when codim <= this ...
    std::size_t det2_backstop_n = 20;  // ... and n <= this

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("SolverBudget: delta must be in (0,1)");
        if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("SolverBudget: nu must be in (0,1)");
    }
};

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline std::uint64_t ceil_to_u64(long double v) {
    constexpr long double kMax = 4.0e18L;
    if (!(v > 0.0L)) return 1;
    if (v >= kMax) return static_cast<std::uint64_t>(kMax);
    return static_cast<std::uint64_t>(std::ceil(v));
}

inline std::uint64_t apply_cap(std::uint64_t budgeted, std::uint64_t cap) {
    return cap > 0 ? std::min(budgeted, cap) : budgeted;
}

// Subsets of `pool` of size 0..tmax, by increasing size, lexicographic
// within a size. Visitor returns true to stop; returns whether stopped.
template <class F>
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t tmax, F&& visit) {
    std::vector<std::size_t> subset;
    const std::size_t limit = std::min(tmax, pool.size());
    for (std::size_t s = 0; s <= limit; ++s) {
        std::vector<std::size_t> idx(s);
        for (std::size_t i = 0; i < s; ++i) idx[i] = i;
        while (true) {
            subset.clear();
            for (auto i : idx) subset.push_back(pool[i]);
            if (visit(static_cast<const std::vector<std::size_t>&>(subset))) return true;
            if (s == 0) break;
            // next lexicographic combination
            std::size_t j = s;
            while (j > 0 && idx[j - 1] == pool.size() - s + (j - 1)) --j;
            if (j == 0) break;
            ++idx[j - 1];
            for (std::size_t i = j; i < s; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
    return false;
}

inline void verify_witness(const SubSatInstance& inst, const BitVec& x) {
    if (!inst.satisfied_by(x)) throw std::logic_error("solver produced an invalid witness");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Brute force over the subspace (the baseline and the test oracle).

inline SolveResult brute_force(const SubSatInstance& inst, unsigned cap = kDefaultEnumCap) {
    detail::Stopwatch sw;
    SolveResult res;
    if (inst.trivially_unsat()) {
        res.verdict = Verdict::Unsat;
        res.stats.note = "defining equations inconsistent";
        res.stats.wall_ms = sw.ms();
        return res;
    }
    std::uint64_t seen = 0;
    std::optional<BitVec> found;
    for_each_point(
        *inst.space,
        [&](const BitVec& x) {
            ++seen;
            if (inst.phi.satisfied_by(x)) {
                found = x;
                return false;
            }
            return true;
        },
        cap);
    res.stats.iterations = seen;
    if (found) {
        detail::verify_witness(inst, *found);
        res.verdict = Verdict::Sat;
        res.witness = std::move(found);
    } else {
        res.verdict = Verdict::Unsat;
    }
    res.stats.wall_ms = sw.ms();
    return res;
}

// ---------------------------------------------------------------------------
// PPZ: random variable order, forced-or-random value setting.

/// One-pass machinery with occurrence lists built once per formula.
class PpzEngine {
public:
    explicit PpzEngine(const CnfFormula& phi) : phi_(&phi), n_(phi.n()) {
        occ_.resize(n_);
        const auto& clauses = phi.clauses();
        for (std::uint32_t ci = 0; ci < clauses.size(); ++ci) {
            for (std::uint32_t li = 0; li < clauses[ci].lits.size(); ++li)
                occ_[clauses[ci].lits[li].var].push_back({ci, li});
            if (clauses[ci].lits.empty()) has_empty_ = true;
        }
        perm_.resize(n_);
        unset_.resize(clauses.size());
        sat_.resize(clauses.size());
        value_.resize(n_);
    }

    /// One PPZ pass. A variable is forced when some clause has every other
    /// literal already set false; contradictory forcings abort the pass.
    std::optional<BitVec> run(Rng& rng) {
        if (has_empty_) return std::nullopt;
        const auto& clauses = phi_->clauses();
        for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
        for (std::size_t i = n_; i > 1; --i) std::swap(perm_[i - 1], perm_[rng.below(i)]);
        for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
            unset_[ci] = static_cast<std::uint32_t>(clauses[ci].lits.size());
            sat_[ci] = 0;
        }
        for (std::size_t pos = 0; pos < n_; ++pos) {
            const std::size_t v = perm_[pos];
            int forced = -1;
            for (const auto& o : occ_[v]) {
                if (sat_[o.clause] || unset_[o.clause] != 1) continue;
                // v is the last unset literal of this clause
                const Literal& l = clauses[o.clause].lits[o.lit];
                const int want = l.neg ? 0 : 1;
                if (forced == -1)
                    forced = want;
                else if (forced != want)
                    return std::nullopt;  // opposite forcings
            }
            const bool b = forced == -1 ? rng.coin() : forced == 1;
            value_[v] = b ? 1 : 0;
            for (const auto& o : occ_[v]) {
                if (sat_[o.clause]) continue;
                if (clauses[o.clause].lits[o.lit].value_under(b)) {
                    sat_[o.clause] = 1;
                } else if (--unset_[o.clause] == 0) {
                    return std::nullopt;  // clause falsified
                }
            }
        }
        BitVec x(n_);
        for (std::size_t v = 0; v < n_; ++v)
            if (value_[v]) x.set(v, true);
        return x;
    }

    static std::uint64_t iteration_budget(const CnfFormula& phi, double delta) {
        const auto n = static_cast<long double>(phi.n());
        const auto k = static_cast<long double>(std::max<std::size_t>(1, phi.k()));
        const long double poly = std::max<long double>(1.0L, n * n);
        return detail::ceil_to_u64(std::log(1.0L / delta) * poly * std::exp2(n - n / k));
    }

private:
    struct Occ {
        std::uint32_t clause;
        std::uint32_t lit;
    };

    const CnfFormula* phi_;
    std::size_t n_;
    bool has_empty_ = false;
    std::vector<std::vector<Occ>> occ_;
    std::vector<std::size_t> perm_;
    std::vector<std::uint32_t> unset_;
    std::vector<std::uint8_t> sat_, value_;
};

inline std::optional<BitVec> ppz_iteration(const CnfFormula& phi, Rng& rng) {
    PpzEngine engine(phi);
    return engine.run(rng);
}

namespace detail {

// Shared PPZ loop: accept the first satisfying assignment passing `accept`.
template <class Accept>
SolveResult ppz_loop(const CnfFormula& phi, const SolverBudget& budget, std::uint64_t budgeted, Accept&& accept) {
    Stopwatch sw;
    SolveResult res;
    res.stats.seed = budget.seed;
    PpzEngine engine(phi);
    Rng base(budget.seed);
    const std::uint64_t total = apply_cap(budgeted, budget.max_iterations);
    for (std::uint64_t i = 0; i < total; ++i) {
        Rng it = base.stream(i);
        auto x = engine.run(it);
        res.stats.iterations = i + 1;
        if (x && accept(*x)) {
            res.verdict = Verdict::Sat;
            res.witness = std::move(x);
            res.stats.wall_ms = sw.ms();
            return res;
        }
    }
    res.verdict = Verdict::Unknown;
    res.stats.wall_ms = sw.ms();
    return res;
}

} // namespace detail

/// Plain PPZ satisfiability search on a formula.
inline SolveResult ppz_solve(const CnfFormula& phi, const SolverBudget& budget) {
    budget.validate();
    if (phi.n() == 0) {
        SolveResult res;
        res.stats.seed = budget.seed;
        if (phi.num_clauses() == 0) {
            res.verdict = Verdict::Sat;
            res.witness = BitVec(0);
        } else {
            res.verdict = Verdict::Unknown;
        }
        return res;
    }
    return detail::ppz_loop(phi, budget, PpzEngine::iteration_budget(phi, budget.delta),
                            [](const BitVec&) { return true; });
}

/// PPZ on the formula with outputs filtered by subspace membership.
inline SolveResult ppz_filter_solve(const SubSatInstance& inst, const SolverBudget& budget) {
    budget.validate();
    if (inst.trivially_unsat()) {
        SolveResult res;
        res.verdict = Verdict::Unsat;
        res.stats.seed = budget.seed;
        res.stats.note = "defining equations inconsistent";
        return res;
    }
    if (inst.n() == 0) return brute_force(inst, budget.enum_cap);
    auto res = detail::ppz_loop(inst.phi, budget, PpzEngine::iteration_budget(inst.phi, budget.delta),
                                [&](const BitVec& x) { return inst.space->contains(x); });
    if (res.verdict == Verdict::Sat) detail::verify_witness(inst, *res.witness);
    return res;
}

// ---------------------------------------------------------------------------
// Co-dimension-t solver: subset plucking + PPZ.

/// Tries every subset U of V_in with |U| <= codim(A), by increasing size and
/// lexicographically within a size. For each U the instance is reduced by
/// pluck/eliminate steps in ascending variable order, PPZ runs on the
/// reduced formula with outputs filtered by membership in the reduced
/// space, and a hit is lifted back through the elimination trace.
inline SolveResult solve_codim_pluck(const SubSatInstance& inst, const SolverBudget& budget) {
    budget.validate();
    detail::Stopwatch sw;
    SolveResult res;
    res.stats.seed = budget.seed;
    if (inst.trivially_unsat()) {
        res.verdict = Verdict::Unsat;
        res.stats.note = "defining equations inconsistent";
        res.stats.wall_ms = sw.ms();
        return res;
    }
    const std::size_t t = inst.codim();
    const auto vin = inst.v_in();
    Rng base(budget.seed);
    std::uint64_t used = 0;
    std::uint64_t subset_id = 0;
    bool capped = false;

    detail::for_each_subset(vin, t, [&](const std::vector<std::size_t>& u) {
        const std::uint64_t sid = subset_id++;
        auto reduced = pluck_and_eliminate(inst, u);
        if (!reduced) return false;  // skip: variable left the equations, or empty clause

        const CnfFormula& phi_u = reduced->inst.phi;
        const AffineSubspace& a_u = *reduced->inst.space;
        PpzEngine engine(phi_u);
        std::uint64_t per_subset = PpzEngine::iteration_budget(phi_u, budget.delta);
        if (phi_u.n() == 0) per_subset = 1;
        Rng sub = base.stream(sid);
        for (std::uint64_t i = 0; i < per_subset; ++i) {
            if (budget.max_iterations > 0 && used >= budget.max_iterations) {
                capped = true;
                return true;
            }
            ++used;
            std::optional<BitVec> x;
            if (phi_u.n() == 0) {
                if (phi_u.num_clauses() == 0) x = BitVec(0);
            } else {
                Rng it = sub.stream(i);
                x = engine.run(it);
            }
            if (x && a_u.contains(*x)) {
                BitVec full = reduced->trace.reconstruct(*x);
                detail::verify_witness(inst, full);
                res.verdict = Verdict::Sat;
                res.witness = std::move(full);
                return true;
            }
        }
        return false;
    });

    res.stats.iterations = used;
    if (res.verdict != Verdict::Sat) {
        res.verdict = Verdict::Unknown;
        if (capped) res.stats.note = "iteration cap reached";
    }
    res.stats.wall_ms = sw.ms();
    return res;
}

// ---------------------------------------------------------------------------
// Valiant-Vazirani isolation.

/// Intersects the space with `s` fresh uniformly random affine constraints.
/// Returns nullopt when the intersection is empty (a failed trial for the
/// caller). The solution set only ever shrinks.
inline std::optional<SubSatInstance> vv_isolate_with_level(const SubSatInstance& inst, std::size_t s, Rng& rng) {
    if (inst.trivially_unsat()) throw std::invalid_argument("vv_isolate: space is empty");
    std::vector<AffineForm> extra;
    extra.reserve(s);
    for (std::size_t i = 0; i < s; ++i) extra.push_back({BitVec::random(inst.n(), rng), rng.coin()});
    auto space = inst.space->intersect(extra);
    if (!space) return std::nullopt;
    return SubSatInstance(inst.phi, std::move(*space));
}

/// Draws the constraint count uniformly from {0, 1, ..., n}.
inline std::optional<SubSatInstance> vv_isolate(const SubSatInstance& inst, Rng& rng) {
    const std::size_t s = static_cast<std::size_t>(rng.below(inst.n() + 1));
    return vv_isolate_with_level(inst, s, rng);
}

// ---------------------------------------------------------------------------
// Easy constraints: global constraints with an efficient extension search.

/// A partial assignment: `values` at coordinates where `mask` is set; the
/// rest are unconstrained.
struct PartialAssignment {
    BitVec values;
    BitVec mask;
};

/// A constraint C over n variables for which partial assignments can be
/// completed to full satisfying assignments (or reported inextendible).
class EasyConstraint {
public:
    virtual ~EasyConstraint() = default;
    virtual std::size_t n() const = 0;

    /// Any returned assignment agrees with the partial input on its set
    /// positions and satisfies the constraint.
    virtual std::optional<BitVec> extend(const PartialAssignment& partial) const = 0;

    /// Non-null when the constraint is affine-subspace membership.
    virtual const AffineSubspace* affine_space() const { return nullptr; }
};

class AffineConstraint final : public EasyConstraint {
public:
    explicit AffineConstraint(AffineSubspace space) : space_(std::move(space)) {}

    std::size_t n() const override { return space_.n(); }
    const AffineSubspace* affine_space() const override { return &space_; }

    std::optional<BitVec> extend(const PartialAssignment& partial) const override {
        std::vector<AffineForm> pins;
        for (std::size_t i = 0; i < space_.n(); ++i)
            if (partial.mask.get(i)) pins.push_back({BitVec::unit(space_.n(), i), partial.values.get(i)});
        auto restricted = space_.intersect(pins);
        if (!restricted) return std::nullopt;
        return restricted->parameterization().particular;
    }

private:
    AffineSubspace space_;
};

/// Horn satisfiability extension by least-model propagation: unset variables
/// start false and are raised only when some clause forces them.
class HornConstraint final : public EasyConstraint {
public:
    explicit HornConstraint(CnfFormula horn) : horn_(std::move(horn)) {
        for (const auto& c : horn_.clauses()) {
            std::size_t positives = 0;
            for (const auto& l : c.lits) positives += l.neg ? 0 : 1;
            if (positives > 1) throw std::invalid_argument("HornConstraint: clause with more than one positive literal");
        }
    }

    std::size_t n() const override { return horn_.n(); }

    std::optional<BitVec> extend(const PartialAssignment& partial) const override {
        const std::size_t nv = horn_.n();
        std::vector<std::uint8_t> value(nv, 0), fixed(nv, 0);
        for (std::size_t i = 0; i < nv; ++i) {
            if (partial.mask.get(i)) {
                fixed[i] = 1;
                value[i] = partial.values.get(i) ? 1 : 0;
            }
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& c : horn_.clauses()) {
                bool sat = false;
                const Literal* positive = nullptr;
                for (const auto& l : c.lits) {
                    if (l.value_under(value[l.var] != 0)) {
                        sat = true;
                        break;
                    }
                    if (!l.neg) positive = &l;
                }
                if (sat) continue;
                // all literals currently false; only raising the positive
                // variable can ever help
                if (positive == nullptr || fixed[positive->var]) return std::nullopt;
                value[positive->var] = 1;
                changed = true;
            }
        }
        BitVec out(nv);
        for (std::size_t i = 0; i < nv; ++i)
            if (value[i]) out.set(i, true);
        return out;
    }

private:
    CnfFormula horn_;
};

inline std::unique_ptr<EasyConstraint> horn_extender(CnfFormula horn) {
    return std::make_unique<HornConstraint>(std::move(horn));
}

inline std::unique_ptr<EasyConstraint> affine_extender(AffineSubspace space) {
    return std::make_unique<AffineConstraint>(std::move(space));
}

// ---------------------------------------------------------------------------
// Oblivious plucking solver.

/// PPZ interleaved with random plucking, closed by a brute-force sweep over
/// the surviving variables with constraint extension. Plucks are oblivious:
/// the constraint is consulted only through `extend`. When the constraint is
/// affine each outer trial first applies Valiant-Vazirani isolation to it.
inline SolveResult solve_oblivious_pluck(const CnfFormula& phi, const EasyConstraint& constraint,
                                         const SolverBudget& budget) {
    budget.validate();
    if (constraint.n() != phi.n()) throw std::invalid_argument("solve_oblivious_pluck: constraint arity mismatch");
    detail::Stopwatch sw;
    SolveResult res;
    res.stats.seed = budget.seed;

    const std::size_t n = phi.n();
    const std::size_t k = std::max<std::size_t>(1, phi.k());
    const std::size_t t = (n + 2 * k - 1) / (2 * k);  // ceil(n / 2k)
    const AffineSubspace* affine = constraint.affine_space();

    std::uint64_t used = 0;
    auto out_of_budget = [&]() { return budget.max_iterations > 0 && used >= budget.max_iterations; };

    auto try_candidate = [&](const std::vector<std::size_t>& alive, const BitVec& a,
                             const EasyConstraint& ec) -> bool {
        PartialAssignment partial{BitVec(n), BitVec(n)};
        for (std::size_t i = 0; i < alive.size(); ++i) {
            partial.mask.set(alive[i], true);
            partial.values.set(alive[i], a.get(i));
        }
        auto ext = ec.extend(partial);
        if (!ext || !phi.satisfied_by(*ext)) return false;
        if (affine && !affine->contains(*ext)) return false;
        res.verdict = Verdict::Sat;
        res.witness = std::move(*ext);
        return true;
    };

    const std::uint64_t outer = detail::ceil_to_u64(std::log(1.0L / budget.delta) * 8.0L *
                                                    static_cast<long double>(n + 1) * std::exp2l(static_cast<long double>(t)));
    Rng base(budget.seed);
    for (std::uint64_t trial = 0; trial < outer && !out_of_budget(); ++trial) {
        Rng rng = base.stream(trial);

        // Isolation: shrink the affine constraint so the surviving solution
        // is unique with decent probability, making every variable outside
        // the equations critical.
        std::unique_ptr<EasyConstraint> isolated;
        const EasyConstraint* ec = &constraint;
        if (affine) {
            SubSatInstance tmp(phi, *affine);
            auto iso = vv_isolate(tmp, rng);
            if (!iso) continue;  // intersection emptied: failed trial
            isolated = std::make_unique<AffineConstraint>(*iso->space);
            ec = isolated.get();
        }

        CnfFormula cur = phi;
        std::vector<std::size_t> alive(n);
        for (std::size_t i = 0; i < n; ++i) alive[i] = i;

        bool trial_dead = false;
        for (std::size_t phase = 0; phase <= t && !trial_dead; ++phase) {
            const auto nj = static_cast<long double>(cur.n());
            const std::uint64_t phase_budget =
                detail::ceil_to_u64(std::exp2l(nj - (1.0L - static_cast<long double>(budget.nu)) * nj /
                                                        static_cast<long double>(k)));
            PpzEngine engine(cur);
            for (std::uint64_t i = 0; i < phase_budget; ++i) {
                if (out_of_budget()) {
                    trial_dead = true;
                    break;
                }
                ++used;
                std::optional<BitVec> a;
                if (cur.n() == 0) {
                    if (cur.num_clauses() == 0) a = BitVec(0);
                } else {
                    a = engine.run(rng);
                }
                if (a && try_candidate(alive, *a, *ec)) {
                    res.stats.iterations = used;
                    res.stats.wall_ms = sw.ms();
                    return res;
                }
                if (cur.n() == 0) break;
            }
            if (trial_dead || phase == t || cur.n() == 0) break;
            const std::size_t pick = static_cast<std::size_t>(rng.below(cur.n()));
            auto plucked = pluck(cur, pick);
            if (!plucked) {
                trial_dead = true;  // empty clause: a critical variable was plucked
                break;
            }
            cur = std::move(*plucked);
            alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        if (trial_dead) continue;

        // Final sweep over the remaining variables, extending each
        // satisfying assignment of the shrunken formula.
        const std::size_t remaining = cur.n();
        if (remaining >= 64) throw std::length_error("solve_oblivious_pluck: final sweep too large");
        const std::uint64_t total = std::uint64_t{1} << remaining;
        BitVec a(remaining);
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            if (out_of_budget()) break;
            ++used;
            if (mask != 0) a.flip(static_cast<std::size_t>(std::countr_zero(mask)));  // Gray order
            if (!cur.satisfied_by(a)) continue;
            if (try_candidate(alive, a, *ec)) {
                res.stats.iterations = used;
                res.stats.wall_ms = sw.ms();
                return res;
            }
        }
    }

    res.verdict = Verdict::Unknown;
    res.stats.iterations = used;
    if (out_of_budget()) res.stats.note = "iteration cap reached";
    res.stats.wall_ms = sw.ms();
    return res;
}

/// Convenience wrapper: oblivious plucking with affine membership as the
/// easy constraint.
inline SolveResult solve_oblivious_pluck(const SubSatInstance& inst, const SolverBudget& budget) {
    if (inst.trivially_unsat()) {
        SolveResult res;
        res.verdict = Verdict::Unsat;
        res.stats.seed = budget.seed;
        res.stats.note = "defining equations inconsistent";
        return res;
    }
    AffineConstraint membership(*inst.space);
    return solve_oblivious_pluck(inst.phi, membership, budget);
}

// ---------------------------------------------------------------------------
// Randomized affine branching.

struct BranchOutcome {
    LinearSystem system;  // rows are "chosen form + 1 = 0"; every solution satisfies psi
    BitVec solution;
};

/// One branching pass over the clause list, maintaining an independent
/// linear system. Clauses implied satisfied are discarded; a clause whose
/// forms are all implied zero fails the pass; otherwise one uniformly random
/// nonzero combination of the live forms is set to 1 (the single live form,
/// deterministically, when only one remains).
template <class Chooser>
std::optional<BranchOutcome> branch_iteration_choose(const AffineClauseFormula& psi, Chooser&& pick) {
    const std::size_t r = psi.r;
    std::vector<AffineForm> rows;
    std::vector<std::size_t> pivots;

    auto reduce = [&](AffineForm f) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (f.coeffs.get(pivots[i])) f += rows[i];
        return f;
    };
    auto add_row = [&](AffineForm row) {
        const std::size_t p = row.coeffs.first_set();
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].coeffs.get(p)) rows[i] += row;
        rows.push_back(std::move(row));
        pivots.push_back(p);
    };

    for (const auto& clause : psi.clauses) {
        bool satisfied = false;
        std::vector<AffineForm> live;
        for (const auto& f : clause) {
            AffineForm res = reduce(f);
            if (res.is_constant()) {
                if (res.constant) {
                    satisfied = true;
                    break;
                }
                continue;  // implied zero
            }
            live.push_back(std::move(res));
        }
        if (satisfied) continue;
        if (live.empty()) return std::nullopt;

        AffineForm chosen;
        if (live.size() == 1) {
            chosen = live[0];
        } else {
            if (live.size() >= 63) throw std::invalid_argument("branch_iteration: clause too wide");
            const std::uint64_t combos = (std::uint64_t{1} << live.size()) - 1;
            const std::uint64_t alpha = pick(combos) + 1;
            chosen = AffineForm(r);
            for (std::size_t j = 0; j < live.size(); ++j)
                if ((alpha >> j) & 1) chosen += live[j];
        }
        if (chosen.is_constant()) {
            // combination collapsed against the current system
            if (chosen.constant) continue;  // already forced to 1: clause satisfied
            return std::nullopt;
        }
        add_row(chosen + AffineForm::one(r));  // equation chosen = 1
    }

    BranchOutcome out;
    out.system = LinearSystem(r, rows);
    auto space = AffineSubspace::from_system(out.system);  // independent rows: always consistent
    out.solution = space->parameterization().particular;
    return out;
}

inline std::optional<BranchOutcome> branch_iteration(const AffineClauseFormula& psi, Rng& rng) {
    return branch_iteration_choose(psi, [&](std::uint64_t combos) { return rng.below(combos); });
}

/// Repeated branching on the affine-clause view of the instance. Budget is
/// ln(1/delta) * ((2^k - 1) / 2^{k-1})^r iterations, the inverse of the
/// per-iteration success bound (1.5^r for width 2).
inline SolveResult solve_branch(const SubSatInstance& inst, const SolverBudget& budget) {
    budget.validate();
    detail::Stopwatch sw;
    SolveResult res;
    res.stats.seed = budget.seed;
    if (inst.trivially_unsat()) {
        res.verdict = Verdict::Unsat;
        res.stats.note = "defining equations inconsistent";
        res.stats.wall_ms = sw.ms();
        return res;
    }
    AffineClauseView view = to_affine_clause_form(inst);
    if (view.psi.has_empty_clause()) {
        res.verdict = Verdict::Unsat;
        res.stats.note = "a clause is false on the entire space";
        res.stats.wall_ms = sw.ms();
        return res;
    }
    const std::size_t r = view.psi.r;
    const std::size_t kw = std::max<std::size_t>(1, inst.phi.k());
    const long double base =
        (std::exp2l(static_cast<long double>(kw)) - 1.0L) / std::exp2l(static_cast<long double>(kw - 1));
    const std::uint64_t budgeted = detail::ceil_to_u64(std::log(1.0L / budget.delta) *
                                                       std::pow(base, static_cast<long double>(r)));
    const std::uint64_t total = detail::apply_cap(budgeted, budget.max_iterations);

    Rng rng_base(budget.seed);
    for (std::uint64_t i = 0; i < total; ++i) {
        Rng it = rng_base.stream(i);
        auto out = branch_iteration(view.psi, it);
        res.stats.iterations = i + 1;
        if (out) {
            BitVec full = view.lift(out->solution);
            detail::verify_witness(inst, full);
            res.verdict = Verdict::Sat;
            res.witness = std::move(full);
            res.stats.wall_ms = sw.ms();
            return res;
        }
    }
    res.verdict = Verdict::Unknown;
    res.stats.wall_ms = sw.ms();
    return res;
}

// ---------------------------------------------------------------------------
// Deterministic solver for width <= 2.

/// Subset search driven by canonical assignments: for every subset U of the
/// equation variables with |U| <= codim(A), pluck/eliminate U and test
/// whether the canonical satisfying assignment of the reduced formula lands
/// in the reduced space. Sat witnesses are lifted through the trace. A
/// negative search is cross-checked by enumeration of A whenever the
/// configured backstop caps allow; the verdict is Unsat either way, never
/// Unknown.
inline SolveResult solve_2subsat_det(const SubSatInstance& inst, const SolverBudget& budget = {}) {
    if (inst.phi.k() > 2) throw std::invalid_argument("solve_2subsat_det: clause width exceeds 2");
    detail::Stopwatch sw;
    SolveResult res;
    if (inst.trivially_unsat()) {
        res.verdict = Verdict::Unsat;
        res.stats.note = "defining equations inconsistent";
        res.stats.wall_ms = sw.ms();
        return res;
    }
    const std::size_t t = inst.codim();
    const auto vin = inst.v_in();
    std::uint64_t tried = 0;

    detail::for_each_subset(vin, t, [&](const std::vector<std::size_t>& u) {
        ++tried;
        auto reduced = pluck_and_eliminate(inst, u);
        if (!reduced) return false;
        auto canon = canonical_assignment(reduced->inst.phi);
        if (!canon) return false;
        if (!reduced->inst.space->contains(canon->assignment)) return false;
        BitVec full = reduced->trace.reconstruct(canon->assignment);
        detail::verify_witness(inst, full);
        res.verdict = Verdict::Sat;
        res.witness = std::move(full);
        return true;
    });

    res.stats.iterations = tried;
    if (res.verdict != Verdict::Sat) {
        if (t <= budget.det2_backstop_codim && inst.n() <= budget.det2_backstop_n &&
            inst.dim() <= budget.enum_cap) {
            std::optional<BitVec> found;
            for_each_point(
                *inst.space,
                [&](const BitVec& x) {
                    if (inst.phi.satisfied_by(x)) {
                        found = x;
                        return false;
                    }
                    return true;
                },
                budget.enum_cap);
            if (found) {
                // the subset search missed a witness; report it rather than
                // a wrong refutation
                detail::verify_witness(inst, *found);
                res.verdict = Verdict::Sat;
                res.witness = std::move(found);
                res.stats.note = "witness found by enumeration backstop";
            } else {
                res.verdict = Verdict::Unsat;
                res.stats.note = "refutation verified by enumeration";
            }
        } else {
            res.verdict = Verdict::Unsat;
            res.stats.note = "subset search exhausted (no enumeration cross-check at this size)";
        }
    }
    res.stats.wall_ms = sw.ms();
    return res;
}

// ---------------------------------------------------------------------------
// Degree reduction for products of affine forms.

/// Replaces each equation prod_j Q_ij = 0 by prod_s (1 + sum_j a_ijs (1 + Q_ij)) = 0
/// with fresh uniform bits a_ijs, using L = `combinations` random
/// combinations. Unsatisfiable systems stay unsatisfiable for every draw;
/// a fixed solution survives one equation's draw with probability exactly
/// 1 - 2^{-L}.
template <class Coin>
PafInstance degree_reduce_with(const PafInstance& paf, unsigned combinations, Coin&& coin) {
    PafInstance out;
    out.n = paf.n;
    out.equations.reserve(paf.equations.size());
    for (const auto& eq : paf.equations) {
        std::vector<AffineForm> complements;
        complements.reserve(eq.factors.size());
        for (const auto& q : eq.factors) complements.push_back(q + AffineForm::one(paf.n));
        PafEquation reduced;
        for (unsigned s = 0; s < combinations; ++s) {
            AffineForm combo(paf.n);
            for (const auto& rc : complements)
                if (coin()) combo += rc;
            reduced.factors.push_back(combo + AffineForm::one(paf.n));
        }
        out.equations.push_back(std::move(reduced));
    }
    return out;
}

inline PafInstance degree_reduce(const PafInstance& paf, unsigned combinations, Rng& rng) {
    return degree_reduce_with(paf, combinations, [&]() { return rng.coin(); });
}

/// Exhaustive search over F2^n for a common zero of a PAF system.
inline std::optional<BitVec> paf_brute_force(const PafInstance& paf, unsigned cap = kDefaultEnumCap) {
    if (paf.n > cap || paf.n >= 64) throw std::length_error("paf_brute_force: variable count exceeds enumeration cap");
    const std::uint64_t total = std::uint64_t{1} << paf.n;
    BitVec x(paf.n);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        if (mask != 0) x.flip(static_cast<std::size_t>(std::countr_zero(mask)));
        if (paf.satisfied_by(x)) return x;
    }
    return std::nullopt;
}

using PafSolver = std::function<std::optional<BitVec>(const PafInstance&)>;

/// Randomized degree reduction wrapped around a bounded-degree inner solver.
/// Requires every factor affine (the type enforces it) and m <= c*n for the
/// configured density c (derived from the instance if unset). L is
/// max(1, ceil((beta+1) * log2(c))); the trial count is
/// ln(1/delta) * e^{n / c^beta}. Reduced-system witnesses always satisfy the
/// original system; they are re-verified against it regardless.
inline SolveResult solve_paf_degree_reduction(const PafInstance& paf, const SolverBudget& budget,
                                              const PafSolver& inner = {}) {
    budget.validate();
    detail::Stopwatch sw;
    SolveResult res;
    res.stats.seed = budget.seed;
    const std::size_t n = paf.n;
    const std::size_t m = paf.equations.size();
    const double c = budget.paf_density > 0.0
                         ? budget.paf_density
                         : std::max(1.0, std::ceil(static_cast<double>(m) / static_cast<double>(std::max<std::size_t>(n, 1))));
    if (static_cast<double>(m) > c * static_cast<double>(std::max<std::size_t>(n, 1)) + 1e-9)
        throw std::invalid_argument("solve_paf_degree_reduction: equation count exceeds density bound");
    const unsigned combinations =
        std::max(1u, static_cast<unsigned>(std::ceil((budget.beta + 1.0) * std::log2(std::max(c, 1.0)))));
    const std::uint64_t budgeted = detail::ceil_to_u64(
        std::log(1.0L / budget.delta) *
        std::exp(static_cast<long double>(n) / std::pow(static_cast<long double>(c), budget.beta)));
    const std::uint64_t trials = detail::apply_cap(budgeted, budget.max_iterations);

    PafSolver solver = inner ? inner : PafSolver([&](const PafInstance& p) { return paf_brute_force(p, budget.enum_cap); });

    Rng base(budget.seed);
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        Rng rng = base.stream(trial);
        PafInstance reduced = degree_reduce(paf, combinations, rng);
        auto witness = solver(reduced);
        res.stats.iterations = trial + 1;
        if (witness && paf.satisfied_by(*witness)) {
            res.verdict = Verdict::Sat;
            res.witness = std::move(witness);
            res.stats.wall_ms = sw.ms();
            return res;
        }
    }
    res.verdict = Verdict::Unknown;
    res.stats.wall_ms = sw.ms();
    return res;
}

} // namespace subsat
