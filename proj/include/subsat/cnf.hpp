#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "subsat/f2.hpp"

namespace subsat {

struct Literal {
    std::uint32_t var = 0;
    bool neg = false;

    bool value_under(bool var_value) const { return var_value ^ neg; }

    /// The form that evaluates to 1 exactly when the literal is true.
    AffineForm form(std::size_t n) const { return {BitVec::unit(n, var), neg}; }

    friend bool operator==(const Literal& a, const Literal& b) {
        return a.var == b.var && a.neg == b.neg;
    }
    friend bool operator<(const Literal& a, const Literal& b) {
        return a.var != b.var ? a.var < b.var : a.neg < b.neg;
    }
};

inline Literal pos(std::uint32_t v) { return {v, false}; }
inline Literal neg(std::uint32_t v) { return {v, true}; }

struct Clause {
    std::vector<Literal> lits;

    std::size_t width() const { return lits.size(); }

    bool satisfied_by(const BitVec& x) const {
        for (const auto& l : lits)
            if (l.value_under(x.get(l.var))) return true;
        return false;
    }

    friend bool operator==(const Clause& a, const Clause& b) { return a.lits == b.lits; }
};

/// CNF formula over n variables. Construction normalizes each clause:
/// literals sorted by variable, duplicates merged, and clauses containing a
/// complementary pair dropped as tautologies. Empty clauses are kept (the
/// formula is then unsatisfiable).
class CnfFormula {
public:
    CnfFormula() = default;

    CnfFormula(std::size_t n, std::vector<Clause> raw) : n_(n) {
        clauses_.reserve(raw.size());
        for (auto& c : raw) {
            std::sort(c.lits.begin(), c.lits.end());
            bool taut = false;
            std::vector<Literal> keep;
            for (std::size_t i = 0; i < c.lits.size(); ++i) {
                if (c.lits[i].var >= n_) throw std::invalid_argument("CnfFormula: literal variable out of range");
                if (i + 1 < c.lits.size() && c.lits[i].var == c.lits[i + 1].var) {
                    if (c.lits[i].neg != c.lits[i + 1].neg) {
                        taut = true;
                        break;
                    }
                    continue;  // duplicate literal
                }
                keep.push_back(c.lits[i]);
            }
            if (taut) continue;
            k_ = std::max(k_, keep.size());
            clauses_.push_back(Clause{std::move(keep)});
        }
    }

    std::size_t n() const { return n_; }
    std::size_t k() const { return k_; }
    const std::vector<Clause>& clauses() const { return clauses_; }
    std::size_t num_clauses() const { return clauses_.size(); }

    bool has_empty_clause() const {
        for (const auto& c : clauses_)
            if (c.lits.empty()) return true;
        return false;
    }

    bool satisfied_by(const BitVec& x) const {
        for (const auto& c : clauses_)
            if (!c.satisfied_by(x)) return false;
        return true;
    }

    std::size_t count_satisfied(const BitVec& x) const {
        std::size_t s = 0;
        for (const auto& c : clauses_)
            if (c.satisfied_by(x)) ++s;
        return s;
    }

    friend bool operator==(const CnfFormula& a, const CnfFormula& b) {
        return a.n_ == b.n_ && a.clauses_ == b.clauses_;
    }

private:
    std::size_t n_ = 0;
    std::vector<Clause> clauses_;
    std::size_t k_ = 0;
};

/// Whether flipping `var` in a satisfying assignment falsifies the formula.
inline bool is_critical(const CnfFormula& phi, const BitVec& assignment, std::size_t var) {
    if (!phi.satisfied_by(assignment)) throw std::invalid_argument("is_critical: assignment does not satisfy formula");
    BitVec flipped = assignment;
    flipped.flip(var);
    return !phi.satisfied_by(flipped);
}

/// Drops every occurrence of `var` (either sign) and renumbers variables
/// above it down by one. Returns nullopt if some clause consisted only of
/// literals on `var`, i.e. the plucked formula is trivially unsatisfiable.
inline std::optional<CnfFormula> pluck(const CnfFormula& phi, std::size_t var) {
    if (var >= phi.n()) throw std::invalid_argument("pluck: variable out of range");
    std::vector<Clause> out;
    out.reserve(phi.num_clauses());
    for (const auto& c : phi.clauses()) {
        Clause nc;
        bool touched = false;
        for (const auto& l : c.lits) {
            if (l.var == var) {
                touched = true;
                continue;
            }
            nc.lits.push_back({l.var > var ? l.var - 1 : l.var, l.neg});
        }
        if (touched && nc.lits.empty()) return std::nullopt;
        out.push_back(std::move(nc));
    }
    return CnfFormula(phi.n() - 1, std::move(out));
}

/// I_out(a) for an explicit point set S: the coordinates i in v_out whose
/// flip leaves S. The set S is given as points of equal length.
inline std::vector<std::size_t> i_out_of(std::span<const BitVec> s, const BitVec& a,
                                         std::span<const std::size_t> v_out) {
    std::vector<const BitVec*> sorted;
    sorted.reserve(s.size());
    for (const auto& p : s) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](const BitVec* x, const BitVec* y) { return *x < *y; });
    auto member = [&](const BitVec& x) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), x,
                                   [](const BitVec* p, const BitVec& v) { return *p < v; });
        return it != sorted.end() && **it == x;
    };
    std::vector<std::size_t> out;
    BitVec y = a;
    for (auto i : v_out) {
        y.flip(i);
        if (!member(y)) out.push_back(i);
        y.flip(i);
    }
    return out;
}

/// Left-hand side of the expansion inequality, scaled by 2^{|v_out|}:
/// sum over a in S of 2^{|I_out(a)|}. The inequality
/// sum 2^{|I_out(a)| - |v_out|} >= 1 holds iff this is >= 2^{|v_out|}.
inline std::uint64_t expansion_lhs_scaled(std::span<const BitVec> s, std::span<const std::size_t> v_out) {
    std::vector<const BitVec*> sorted;
    sorted.reserve(s.size());
    for (const auto& p : s) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](const BitVec* x, const BitVec* y) { return *x < *y; });
    auto member = [&](const BitVec& x) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), x,
                                   [](const BitVec* p, const BitVec& v) { return *p < v; });
        return it != sorted.end() && **it == x;
    };
    std::uint64_t lhs = 0;
    for (const auto& p : s) {
        unsigned iout = 0;
        BitVec y = p;
        for (auto i : v_out) {
            y.flip(i);
            if (!member(y)) ++iout;
            y.flip(i);
        }
        lhs += std::uint64_t{1} << iout;
    }
    return lhs;
}

inline bool expansion_inequality_holds(std::span<const BitVec> s, std::span<const std::size_t> v_out) {
    if (s.empty()) throw std::invalid_argument("expansion_inequality_holds: S must be nonempty");
    return expansion_lhs_scaled(s, v_out) >= (std::uint64_t{1} << v_out.size());
}

} // namespace subsat
