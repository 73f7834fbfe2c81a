#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subsat/cnf.hpp"

namespace subsat {

// Literal node ids: 2*var for the positive literal, 2*var+1 for the negation.
inline std::uint32_t lit_node(const Literal& l) { return 2 * l.var + (l.neg ? 1 : 0); }
inline std::uint32_t node_negate(std::uint32_t u) { return u ^ 1u; }

/// Implication graph of a formula with clauses of width 1 or 2, with its
/// strongly connected components. Skew-symmetric by construction: the edge
/// (u, v) exists iff (~v, ~u) does.
struct ImplicationGraph {
    std::size_t n = 0;                            // variables
    std::vector<std::vector<std::uint32_t>> adj;  // 2n nodes
    std::vector<std::uint32_t> scc_id;            // per node, ids in reverse topological order
    std::uint32_t scc_count = 0;
    bool contradictory = false;  // some variable shares a component with its negation

    bool has_edge(std::uint32_t u, std::uint32_t v) const {
        return std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end();
    }
};

namespace detail {

// Iterative Tarjan SCC.
inline void tarjan_scc(const std::vector<std::vector<std::uint32_t>>& adj, std::vector<std::uint32_t>& comp,
                       std::uint32_t& comp_count) {
    const std::size_t n = adj.size();
    constexpr std::uint32_t kUnset = UINT32_MAX;
    std::vector<std::uint32_t> index(n, kUnset), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack;
    comp.assign(n, kUnset);
    comp_count = 0;
    std::uint32_t next_index = 0;

    struct Frame {
        std::uint32_t node;
        std::size_t child;
    };
    std::vector<Frame> call;
    for (std::uint32_t start = 0; start < n; ++start) {
        if (index[start] != kUnset) continue;
        call.push_back({start, 0});
        index[start] = low[start] = next_index++;
        stack.push_back(start);
        on_stack[start] = true;
        while (!call.empty()) {
            auto& fr = call.back();
            if (fr.child < adj[fr.node].size()) {
                const std::uint32_t w = adj[fr.node][fr.child++];
                if (index[w] == kUnset) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[fr.node] = std::min(low[fr.node], index[w]);
                }
            } else {
                if (low[fr.node] == index[fr.node]) {
                    std::uint32_t w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = comp_count;
                    } while (w != fr.node);
                    ++comp_count;
                }
                const std::uint32_t done = fr.node;
                call.pop_back();
                if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[done]);
            }
        }
    }
}

} // namespace detail

inline ImplicationGraph implication_graph(const CnfFormula& phi) {
    if (phi.k() > 2) throw std::invalid_argument("implication_graph: clause width exceeds 2");
    ImplicationGraph g;
    g.n = phi.n();
    g.adj.assign(2 * g.n, {});
    for (const auto& c : phi.clauses()) {
        if (c.width() == 1) {
            const auto u = lit_node(c.lits[0]);
            g.adj[node_negate(u)].push_back(u);
        } else if (c.width() == 2) {
            const auto u = lit_node(c.lits[0]);
            const auto v = lit_node(c.lits[1]);
            g.adj[node_negate(u)].push_back(v);
            g.adj[node_negate(v)].push_back(u);
        } else {
            throw std::invalid_argument("implication_graph: empty clause");
        }
    }
    detail::tarjan_scc(g.adj, g.scc_id, g.scc_count);
    for (std::size_t v = 0; v < g.n; ++v)
        if (g.scc_id[2 * v] == g.scc_id[2 * v + 1]) {
            g.contradictory = true;
            break;
        }
    return g;
}

/// Output of the canonical 2-SAT assignment procedure. `layers[j]` lists the
/// original literal node ids set true in peeling round j; `depth[v]` is the
/// round in which variable v (or its negation) was peeled, or layers.size()
/// for variables the peeling never touched (those default to 0).
struct Canonical2Sat {
    BitVec assignment;
    std::vector<std::vector<std::uint32_t>> layers;
    std::vector<std::uint32_t> depth;
};

/// Deterministic satisfying assignment for a formula of width <= 2, built by
/// contracting strongly connected literal components and then repeatedly
/// setting all sink literals of the implication DAG true. Returns nullopt
/// when unsatisfiable.
inline std::optional<Canonical2Sat> canonical_assignment(const CnfFormula& phi) {
    const std::size_t n = phi.n();
    if (phi.has_empty_clause()) return std::nullopt;
    ImplicationGraph g = implication_graph(phi);
    if (g.contradictory) return std::nullopt;

    // Contract components: one representative variable per complementary
    // component pair; every variable maps to (rep, relative sign).
    std::vector<std::uint32_t> rep_of_pair(2 * n, UINT32_MAX);  // keyed by min(scc+, scc-)
    std::vector<std::uint32_t> rep(n);
    std::vector<bool> flip(n);
    std::vector<std::uint32_t> rep_vars;
    for (std::uint32_t v = 0; v < n; ++v) {
        const std::uint32_t key = std::min(g.scc_id[2 * v], g.scc_id[2 * v + 1]);
        if (rep_of_pair[key] == UINT32_MAX) {
            rep_of_pair[key] = static_cast<std::uint32_t>(rep_vars.size());
            rep_vars.push_back(v);
        }
        const std::uint32_t r = rep_of_pair[key];
        rep[v] = r;
        flip[v] = g.scc_id[2 * v] != g.scc_id[2 * rep_vars[r]];
    }

    std::vector<Clause> reduced;
    reduced.reserve(phi.num_clauses());
    for (const auto& c : phi.clauses()) {
        Clause rc;
        for (const auto& l : c.lits) rc.lits.push_back({rep[l.var], l.neg != flip[l.var]});
        reduced.push_back(std::move(rc));
    }
    // tautologies introduced by merged components vanish here
    CnfFormula reduced_phi(rep_vars.size(), std::move(reduced));

    // Peel the reduced formula.
    const std::size_t rn = reduced_phi.n();
    std::vector<std::optional<bool>> value(rn);
    std::vector<std::vector<Literal>> active;
    for (const auto& c : reduced_phi.clauses()) active.push_back(c.lits);

    Canonical2Sat out;
    while (!active.empty()) {
        std::vector<std::uint32_t> outdeg(2 * rn, 0);
        std::vector<bool> occurs(rn, false);
        for (const auto& c : active) {
            for (const auto& l : c) occurs[l.var] = true;
            if (c.size() == 1) {
                ++outdeg[node_negate(lit_node(c[0]))];
            } else {
                ++outdeg[node_negate(lit_node(c[0]))];
                ++outdeg[node_negate(lit_node(c[1]))];
            }
        }
        std::vector<std::uint32_t> layer;
        for (std::uint32_t v = 0; v < rn; ++v) {
            if (value[v] || !occurs[v]) continue;
            // at most one of the pair is a sink: a literal with outdegree 0
            // has a negation that occurs in no clause
            if (outdeg[2 * v] == 0) {
                value[v] = true;
                layer.push_back(2 * v);
            } else if (outdeg[2 * v + 1] == 0) {
                value[v] = false;
                layer.push_back(2 * v + 1);
            }
        }
        if (layer.empty()) return std::nullopt;  // unreachable for consistent graphs
        out.layers.push_back(layer);

        std::vector<std::vector<Literal>> next;
        for (auto& c : active) {
            bool sat = false;
            std::vector<Literal> keep;
            for (const auto& l : c) {
                if (value[l.var]) {
                    if (l.value_under(*value[l.var])) {
                        sat = true;
                        break;
                    }
                    continue;  // false literal drops out
                }
                keep.push_back(l);
            }
            if (sat) continue;
            if (keep.empty()) return std::nullopt;
            next.push_back(std::move(keep));
        }
        active = std::move(next);
    }

    // Variables the peeling never reached occur in no clause: assign 0.
    out.assignment = BitVec(n);
    out.depth.assign(n, static_cast<std::uint32_t>(out.layers.size()));
    std::vector<std::uint32_t> rep_depth(rn, static_cast<std::uint32_t>(out.layers.size()));
    for (std::size_t j = 0; j < out.layers.size(); ++j)
        for (auto node : out.layers[j]) rep_depth[node / 2] = static_cast<std::uint32_t>(j);
    for (std::uint32_t v = 0; v < n; ++v) {
        const bool rv = value[rep[v]].value_or(false);
        out.assignment.set(v, rv ^ flip[v]);
        out.depth[v] = rep_depth[rep[v]];
    }

    // Translate layers back to original literal nodes.
    std::vector<std::vector<std::uint32_t>> lifted(out.layers.size());
    for (std::uint32_t v = 0; v < n; ++v) {
        const std::uint32_t d = out.depth[v];
        if (d < lifted.size()) lifted[d].push_back(2 * v + (out.assignment.get(v) ? 0 : 1));
    }
    out.layers = std::move(lifted);
    return out;
}

} // namespace subsat
