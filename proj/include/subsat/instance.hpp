#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "subsat/cnf.hpp"
#include "subsat/f2.hpp"

namespace subsat {

/// A k-CNF formula together with the affine subspace in which a satisfying
/// assignment is sought. A missing space means the defining equations were
/// inconsistent: the instance is trivially unsatisfiable but still a valid
/// object (parsers produce it).
struct SubSatInstance {
    CnfFormula phi;
    std::optional<AffineSubspace> space;

    SubSatInstance() = default;
    SubSatInstance(CnfFormula f, std::optional<AffineSubspace> a) : phi(std::move(f)), space(std::move(a)) {
        if (space && space->n() != phi.n())
            throw std::invalid_argument("SubSatInstance: formula/space arity mismatch");
    }

    static SubSatInstance free_space(CnfFormula f) {
        const std::size_t n = f.n();
        return {std::move(f), AffineSubspace::full(n)};
    }

    std::size_t n() const { return phi.n(); }
    bool trivially_unsat() const { return !space.has_value(); }
    std::size_t codim() const { return space ? space->codim() : n(); }
    std::size_t dim() const { return space ? space->dim() : 0; }

    bool satisfied_by(const BitVec& x) const {
        return space && space->contains(x) && phi.satisfied_by(x);
    }

    /// Variables with a nonzero coefficient in some defining equation.
    std::vector<std::size_t> v_in() const {
        std::vector<std::size_t> out;
        if (!space) return out;
        for (std::size_t i = 0; i < n(); ++i) {
            for (const auto& row : space->system().rows) {
                if (row.coeffs.get(i)) {
                    out.push_back(i);
                    break;
                }
            }
        }
        return out;
    }

    std::vector<std::size_t> v_out() const {
        auto in = v_in();
        std::vector<std::size_t> out;
        std::size_t j = 0;
        for (std::size_t i = 0; i < n(); ++i) {
            if (j < in.size() && in[j] == i)
                ++j;
            else
                out.push_back(i);
        }
        return out;
    }
};

/// Conjunction of disjunctions of affine forms over r free variables. A
/// clause is satisfied when some form evaluates to 1. An empty clause marks
/// the formula trivially unsatisfiable.
struct AffineClauseFormula {
    std::size_t r = 0;
    std::vector<std::vector<AffineForm>> clauses;

    bool has_empty_clause() const {
        for (const auto& c : clauses)
            if (c.empty()) return true;
        return false;
    }

    std::size_t max_width() const {
        std::size_t w = 0;
        for (const auto& c : clauses) w = std::max(w, c.size());
        return w;
    }

    bool satisfied_by(const BitVec& c) const {
        for (const auto& cl : clauses) {
            bool sat = false;
            for (const auto& f : cl)
                if (f.eval(c)) {
                    sat = true;
                    break;
                }
            if (!sat) return false;
        }
        return true;
    }
};

/// System of equations p_i = 0 where each p_i is a product of affine forms.
struct PafEquation {
    std::vector<AffineForm> factors;  // nonempty

    bool satisfied_by(const BitVec& x) const {
        for (const auto& f : factors)
            if (!f.eval(x)) return true;  // some factor vanishes
        return false;
    }
};

struct PafInstance {
    std::size_t n = 0;
    std::vector<PafEquation> equations;

    bool satisfied_by(const BitVec& x) const {
        for (const auto& e : equations)
            if (!e.satisfied_by(x)) return false;
        return true;
    }
};

/// Union-of-subspace avoidance: find x outside every listed subspace.
struct UsaInstance {
    std::size_t n = 0;
    std::vector<AffineSubspace> spaces;

    bool avoided_by(const BitVec& x) const {
        for (const auto& a : spaces)
            if (a.contains(x)) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// Equivalence conversions. Each preserves the solution set exactly (as a
// subset of F2^n, or of F2^r after substitution of dependent variables).

inline UsaInstance subsat_to_usa(const SubSatInstance& inst) {
    UsaInstance u;
    u.n = inst.n();
    if (!inst.space) {
        u.spaces.push_back(AffineSubspace::full(u.n));  // everything is excluded
        return u;
    }
    for (const auto& c : inst.phi.clauses()) {
        // points falsifying the clause: every literal's form equals 0
        LinearSystem sys(u.n);
        for (const auto& l : c.lits) sys.add_row(l.form(u.n));
        auto a = AffineSubspace::from_system(sys);
        u.spaces.push_back(std::move(*a));  // consistent: no complementary pair
    }
    for (const auto& row : inst.space->system().rows) {
        LinearSystem sys(u.n);
        sys.add_row(row + AffineForm::one(u.n));  // points violating row = 0
        u.spaces.push_back(std::move(*AffineSubspace::from_system(sys)));
    }
    return u;
}

inline AffineClauseFormula usa_to_subsat(const UsaInstance& u) {
    AffineClauseFormula out;
    out.r = u.n;
    for (const auto& a : u.spaces) {
        // x avoids the space iff some defining row is nonzero at x
        out.clauses.push_back(a.system().rows);
    }
    return out;
}

inline PafInstance subsat_to_paf(const SubSatInstance& inst) {
    PafInstance p;
    p.n = inst.n();
    if (!inst.space) {
        p.equations.push_back({{AffineForm::one(p.n)}});  // 1 = 0
        return p;
    }
    for (const auto& c : inst.phi.clauses()) {
        PafEquation eq;
        if (c.lits.empty()) {
            eq.factors.push_back(AffineForm::one(p.n));
        } else {
            for (const auto& l : c.lits) eq.factors.push_back(l.form(p.n) + AffineForm::one(p.n));
        }
        p.equations.push_back(std::move(eq));
    }
    for (const auto& row : inst.space->system().rows) p.equations.push_back({{row}});
    return p;
}

inline AffineClauseFormula paf_to_subsat(const PafInstance& p) {
    AffineClauseFormula out;
    out.r = p.n;
    for (const auto& eq : p.equations) {
        std::vector<AffineForm> clause;
        for (const auto& f : eq.factors) clause.push_back(f + AffineForm::one(p.n));
        out.clauses.push_back(std::move(clause));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Substitution of dependent variables.

/// The instance rewritten over the r free coordinates of its space, plus the
/// parameterization needed to lift solutions back to F2^n. Clauses whose
/// forms become constant are simplified away; a clause with no nonconstant,
/// nonzero form left becomes the empty clause (trivially unsatisfiable).
struct AffineClauseView {
    AffineClauseFormula psi;
    AffineSubspace::Parameterization param;

    BitVec lift(const BitVec& coeffs) const { return point_from_coeffs(param, coeffs); }
};

inline AffineClauseView to_affine_clause_form(const SubSatInstance& inst) {
    if (!inst.space) throw std::invalid_argument("to_affine_clause_form: space is empty");
    AffineClauseView view;
    view.param = inst.space->parameterization();
    view.psi.r = inst.space->dim();
    for (const auto& c : inst.phi.clauses()) {
        std::vector<AffineForm> forms;
        bool satisfied = false;
        for (const auto& l : c.lits) {
            AffineForm f = restrict_to_kernel(l.form(inst.n()), view.param);
            if (f.is_constant()) {
                if (f.constant) {
                    satisfied = true;
                    break;
                }
                continue;  // identically false literal
            }
            forms.push_back(std::move(f));
        }
        if (satisfied) continue;
        view.psi.clauses.push_back(std::move(forms));
    }
    return view;
}

// ---------------------------------------------------------------------------
// Pluck/eliminate.

/// One pluck step: the plucked variable's index in the numbering current at
/// that step, and its value as a form over the numbering after the step.
struct PluckStep {
    std::size_t var = 0;
    AffineForm rhs;
};

struct PluckTrace {
    std::vector<PluckStep> steps;

    /// Extends a solution of the reduced instance to the original variables,
    /// replaying the recorded eliminations in reverse.
    BitVec reconstruct(BitVec x) const {
        for (auto it = steps.rbegin(); it != steps.rend(); ++it)
            x = x.inserted(it->var, it->rhs.eval(x));
        return x;
    }
};

struct PluckedInstance {
    SubSatInstance inst;
    PluckTrace trace;
};

/// Applies pluck/eliminate steps for `vars` (indices in the original
/// instance, processed in the given order). Fails when a variable occurs in
/// no remaining defining equation at its turn, or when plucking produces an
/// empty clause. On success the codimension drops by exactly |vars| and the
/// trace extends any solution of the result to one of the input.
inline std::optional<PluckedInstance> pluck_and_eliminate(const SubSatInstance& inst,
                                                          const std::vector<std::size_t>& vars) {
    if (!inst.space) throw std::invalid_argument("pluck_and_eliminate: space is empty");
    CnfFormula phi = inst.phi;
    std::vector<AffineForm> rows = inst.space->system().rows;
    std::vector<std::size_t> alive(inst.n());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

    PluckTrace trace;
    for (std::size_t orig : vars) {
        auto pos = std::lower_bound(alive.begin(), alive.end(), orig);
        if (pos == alive.end() || *pos != orig) throw std::invalid_argument("pluck_and_eliminate: repeated or bad variable");
        const std::size_t cur = static_cast<std::size_t>(pos - alive.begin());

        std::size_t chosen = rows.size();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].coeffs.get(cur)) {
                chosen = r;
                break;
            }
        }
        if (chosen == rows.size()) return std::nullopt;  // not in any remaining equation

        for (std::size_t r = 0; r < rows.size(); ++r)
            if (r != chosen && rows[r].coeffs.get(cur)) rows[r] += rows[chosen];

        // x_cur = sum of the other coefficients of the chosen row, plus its constant
        AffineForm rhs{rows[chosen].coeffs.erased(cur), rows[chosen].constant};
        rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(chosen));
        for (auto& r : rows) r = AffineForm{r.coeffs.erased(cur), r.constant};

        auto plucked = pluck(phi, cur);
        if (!plucked) return std::nullopt;  // empty clause produced
        phi = std::move(*plucked);
        alive.erase(pos);
        trace.steps.push_back({cur, std::move(rhs)});
    }

    auto space = AffineSubspace::from_system(LinearSystem(phi.n(), std::move(rows)));
    // elimination preserves solvability of a consistent system
    if (!space) throw std::logic_error("pluck_and_eliminate: reduced system inconsistent");
    return PluckedInstance{SubSatInstance(std::move(phi), std::move(*space)), std::move(trace)};
}

// ---------------------------------------------------------------------------
// Lowering product-of-affine-forms systems to CNF + affine equations.

/// CNF+XOR encoding of a PAF system. Factors that are single-variable forms
/// become literals directly; every other nonconstant factor gets a fresh
/// definition variable y = <coeffs, x>, shared across equal coefficient
/// vectors. Solutions are in bijection with the original system's (the new
/// variables are determined), so solution counts are preserved.
struct LoweredPaf {
    SubSatInstance inst;
    std::size_t original_n = 0;  // first original_n variables are the PAF variables
};

inline LoweredPaf lower_paf_to_subsat(const PafInstance& paf) {
    std::map<BitVec, std::size_t> defs;  // coefficient vector -> definition variable
    std::vector<BitVec> def_order;
    std::vector<Clause> clauses;
    bool contradiction = false;

    std::vector<std::vector<Literal>> pending;  // clause literals, vars may be definitions
    for (const auto& eq : paf.equations) {
        std::vector<Literal> lits;
        bool eq_satisfied = false;
        for (const auto& f : eq.factors) {
            if (f.is_constant()) {
                if (!f.constant) eq_satisfied = true;  // factor identically 0
                continue;                              // identically 1: never vanishes
            }
            const std::size_t weight = f.coeffs.popcount();
            if (weight == 1) {
                const auto v = static_cast<std::uint32_t>(f.coeffs.first_set());
                // f = x_v + b vanishes iff x_v = b
                lits.push_back({v, !f.constant});
            } else {
                auto [it, fresh] = defs.try_emplace(f.coeffs, paf.n + defs.size());
                if (fresh) def_order.push_back(f.coeffs);
                // y = <coeffs, x>; f vanishes iff y = constant
                lits.push_back({static_cast<std::uint32_t>(it->second), !f.constant});
            }
        }
        if (eq_satisfied) continue;
        if (lits.empty()) contradiction = true;  // product identically 1
        pending.push_back(std::move(lits));
    }

    const std::size_t total = paf.n + defs.size();
    for (auto& lits : pending) clauses.push_back(Clause{std::move(lits)});
    if (contradiction) clauses.push_back(Clause{});

    LinearSystem sys(total);
    for (std::size_t d = 0; d < def_order.size(); ++d) {
        AffineForm row(total);
        for (std::size_t i = 0; i < paf.n; ++i)
            if (def_order[d].get(i)) row.coeffs.set(i, true);
        row.coeffs.set(paf.n + d, true);  // y + <coeffs, x> = 0
        sys.add_row(std::move(row));
    }

    LoweredPaf out;
    out.original_n = paf.n;
    auto space = AffineSubspace::from_system(sys);  // definition rows are independent
    out.inst = SubSatInstance(CnfFormula(total, std::move(clauses)), std::move(*space));
    return out;
}

} // namespace subsat
