#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "subsat/cnf.hpp"
#include "subsat/f2.hpp"
#include "subsat/instance.hpp"
#include "subsat/rng.hpp"

namespace subsat {

/// Undirected graph without self-loops; edges stored normalized (u < v),
/// sorted, unique.
struct Graph {
    std::size_t num_vertices = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

    Graph() = default;
    Graph(std::size_t v, std::vector<std::pair<std::uint32_t, std::uint32_t>> e) : num_vertices(v) {
        for (auto& [a, b] : e) {
            if (a == b) throw std::invalid_argument("Graph: self-loop");
            if (a >= v || b >= v) throw std::invalid_argument("Graph: vertex out of range");
            if (a > b) std::swap(a, b);
        }
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
        edges = std::move(e);
    }

    bool has_edge(std::uint32_t a, std::uint32_t b) const {
        if (a > b) std::swap(a, b);
        return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
    }

    static Graph complete(std::size_t v) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
        for (std::uint32_t a = 0; a < v; ++a)
            for (std::uint32_t b = a + 1; b < v; ++b) e.emplace_back(a, b);
        return {v, std::move(e)};
    }

    static Graph cycle(std::size_t v) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
        for (std::uint32_t a = 0; a < v; ++a) e.emplace_back(a, static_cast<std::uint32_t>((a + 1) % v));
        return {v, std::move(e)};
    }

    /// Complete multipartite graph with the given part sizes.
    static Graph complete_multipartite(const std::vector<std::size_t>& sizes) {
        std::size_t v = 0;
        for (auto s : sizes) v += s;
        std::vector<std::uint32_t> part_of(v);
        std::size_t at = 0;
        for (std::size_t p = 0; p < sizes.size(); ++p)
            for (std::size_t i = 0; i < sizes[p]; ++i) part_of[at++] = static_cast<std::uint32_t>(p);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
        for (std::uint32_t a = 0; a < v; ++a)
            for (std::uint32_t b = a + 1; b < v; ++b)
                if (part_of[a] != part_of[b]) e.emplace_back(a, b);
        return {v, std::move(e)};
    }
};

struct PartitionedGraph {
    Graph graph;
    std::vector<std::vector<std::uint32_t>> parts;

    PartitionedGraph() = default;
    PartitionedGraph(Graph g, std::vector<std::vector<std::uint32_t>> p) : graph(std::move(g)), parts(std::move(p)) {
        std::vector<bool> seen(graph.num_vertices, false);
        std::size_t covered = 0;
        for (const auto& part : parts) {
            for (auto v : part) {
                if (v >= graph.num_vertices || seen[v]) throw std::invalid_argument("PartitionedGraph: parts must partition V");
                seen[v] = true;
                ++covered;
            }
        }
        if (covered != graph.num_vertices) throw std::invalid_argument("PartitionedGraph: parts must cover V");
    }

    /// Uniform split of vertices into t contiguous parts.
    static PartitionedGraph contiguous(Graph g, std::size_t t) {
        std::vector<std::vector<std::uint32_t>> parts(t);
        for (std::uint32_t v = 0; v < g.num_vertices; ++v) parts[v % t].push_back(v);
        for (auto& p : parts) std::sort(p.begin(), p.end());
        return {std::move(g), std::move(parts)};
    }
};

// ---------------------------------------------------------------------------
// Hardness-reduction gadgets as instance generators.

/// Graph 4-colorability as a product-of-two-affine-forms system: vertex v
/// owns the color bits (2v, 2v+1); each edge (u,v) contributes
/// (x_{2u} + x_{2v} + 1)(x_{2u+1} + x_{2v+1} + 1) = 0, satisfied exactly when
/// the endpoint colors differ.
inline PafInstance four_coloring_to_2paf(const Graph& g) {
    PafInstance out;
    out.n = 2 * g.num_vertices;
    out.equations.reserve(g.edges.size());
    for (const auto& [u, v] : g.edges) {
        PafEquation eq;
        for (int bit = 0; bit < 2; ++bit) {
            AffineForm f(out.n, true);
            f.coeffs.set(2 * u + bit, true);
            f.coeffs.set(2 * v + bit, true);
            eq.factors.push_back(std::move(f));
        }
        out.equations.push_back(std::move(eq));
    }
    return out;
}

/// Multicolored clique as width-2 satisfiability in a subspace: one
/// indicator variable per vertex, clauses forbidding two picks in a part or
/// picking both ends of a non-edge, and one parity equation per part forcing
/// an odd number of picks. Satisfying assignments are exactly the
/// multicolored t-cliques; codim(A) equals the part count.
inline SubSatInstance multicolored_clique_to_2subsat(const PartitionedGraph& pg) {
    const std::size_t n = pg.graph.num_vertices;
    std::vector<std::uint32_t> part_of(n, 0);
    for (std::uint32_t p = 0; p < pg.parts.size(); ++p)
        for (auto v : pg.parts[p]) part_of[v] = p;

    std::vector<Clause> clauses;
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = a + 1; b < n; ++b) {
            if (part_of[a] == part_of[b] || !pg.graph.has_edge(a, b))
                clauses.push_back(Clause{{neg(a), neg(b)}});
        }
    }

    LinearSystem sys(n);
    for (const auto& part : pg.parts) {
        AffineForm row(n, true);  // sum of part variables = 1
        for (auto v : part) row.coeffs.set(v, true);
        sys.add_row(std::move(row));
    }
    auto space = AffineSubspace::from_system(sys);
    return SubSatInstance(CnfFormula(n, std::move(clauses)), std::move(space));
}

/// One OXR constraint l1 OR (l2 XOR l3) applied to literals.
struct OxrTriple {
    Literal a, b, c;
};

/// OXR constraints as one product equation each:
/// (f1 + 1)(f2 + f3 + 1) = 0 with fi the literal forms.
inline PafInstance oxr_to_2paf(std::span<const OxrTriple> triples, std::size_t n) {
    PafInstance out;
    out.n = n;
    for (const auto& tr : triples) {
        PafEquation eq;
        eq.factors.push_back(tr.a.form(n) + AffineForm::one(n));
        eq.factors.push_back(tr.b.form(n) + tr.c.form(n) + AffineForm::one(n));
        out.equations.push_back(std::move(eq));
    }
    return out;
}

inline bool oxr_holds(const OxrTriple& tr, const BitVec& x) {
    const bool a = tr.a.value_under(x.get(tr.a.var));
    const bool b = tr.b.value_under(x.get(tr.b.var));
    const bool c = tr.c.value_under(x.get(tr.c.var));
    return a || (b != c);
}

/// Max-LIN2 to products of two affine forms: one equation A_i * A_j = 0 per
/// unordered pair. An assignment violating r of the input equations violates
/// exactly C(r, 2) of the outputs.
inline PafInstance maxlin2_to_e2paf(std::span<const AffineForm> forms) {
    for (std::size_t i = 0; i < forms.size(); ++i)
        for (std::size_t j = i + 1; j < forms.size(); ++j)
            if (forms[i] == forms[j]) throw std::invalid_argument("maxlin2_to_e2paf: duplicate forms");
    PafInstance out;
    out.n = forms.empty() ? 0 : forms[0].n();
    for (std::size_t i = 0; i < forms.size(); ++i) {
        if (forms[i].n() != out.n) throw std::invalid_argument("maxlin2_to_e2paf: arity mismatch");
        for (std::size_t j = i + 1; j < forms.size(); ++j)
            out.equations.push_back({{forms[i], forms[j]}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Planted benchmark instances.

struct Planted {
    SubSatInstance inst;
    BitVec witness;
};

/// Planted width-2 instance whose clause literals are definition variables
/// for dense affine forms over an r-dimensional free block: variable y_j
/// (indices 0..2m-1) is pinned to a random dense form of the free variables
/// (indices 2m..2m+r-1), and clause i joins y_{2i} and y_{2i+1}. Substituting
/// the definitions turns every literal into a dense form, so branching-style
/// solvers see live stages throughout; this is the hard benchmark family for
/// the O*(1.5^r) scaling shape. codim = 2m, dim = r.
inline Planted planted_affine_instance(std::size_t r, std::size_t m, Rng& rng, bool unique = false,
                                       unsigned enum_cap = kDefaultEnumCap) {
    if (r == 0 || m == 0) throw std::invalid_argument("planted_affine_instance: r and m must be positive");
    if (unique && r > enum_cap) throw std::invalid_argument("planted_affine_instance: uniqueness check exceeds enumeration cap");
    for (std::size_t attempt = 0;; ++attempt) {
        if (attempt > 200000) throw std::runtime_error("planted_affine_instance: uniqueness rejection did not converge");
        const std::size_t s = 2 * m;
        const std::size_t n = s + r;
        const BitVec xa = BitVec::random(r, rng);

        LinearSystem sys(n);
        std::vector<bool> defined_value(s);
        for (std::size_t j = 0; j < s; ++j) {
            BitVec coeffs(r);
            do {
                coeffs = BitVec::random(r, rng);
            } while (!coeffs.any());
            AffineForm row(n, rng.coin());  // y_j + <coeffs, x> + c = 0
            row.coeffs.set(j, true);
            for (std::size_t i = 0; i < r; ++i)
                if (coeffs.get(i)) row.coeffs.set(s + i, true);
            defined_value[j] = row.constant ^ coeffs.dot(xa);
            sys.add_row(std::move(row));
        }

        std::vector<Clause> clauses;
        clauses.reserve(m);
        for (std::size_t c = 0; c < m; ++c) {
            Clause cl;
            cl.lits.push_back({static_cast<std::uint32_t>(2 * c), rng.coin()});
            cl.lits.push_back({static_cast<std::uint32_t>(2 * c + 1), rng.coin()});
            const bool sat = (defined_value[2 * c] ^ cl.lits[0].neg) || (defined_value[2 * c + 1] ^ cl.lits[1].neg);
            if (!sat) {
                const std::size_t flip = static_cast<std::size_t>(rng.below(2));
                cl.lits[flip].neg = !cl.lits[flip].neg;
            }
            clauses.push_back(std::move(cl));
        }

        BitVec witness(n);
        for (std::size_t j = 0; j < s; ++j) witness.set(j, defined_value[j]);
        for (std::size_t i = 0; i < r; ++i) witness.set(s + i, xa.get(i));

        auto space = AffineSubspace::from_system(sys);
        Planted out{SubSatInstance(CnfFormula(n, std::move(clauses)), std::move(*space)), witness};
        if (!unique) return out;
        std::size_t solutions = 0;
        for_each_point(
            *out.inst.space,
            [&](const BitVec& x) {
                if (out.inst.phi.satisfied_by(x)) ++solutions;
                return solutions < 2;
            },
            enum_cap);
        if (solutions == 1) return out;
    }
}

/// Draws a point, t independent affine equations through it, and m random
/// width-k clauses each adjusted (one uniformly chosen literal flipped) to
/// hold at the point. With `unique` set, redraws until enumeration confirms
/// a single solution.
inline Planted planted_instance(std::size_t n, std::size_t k, std::size_t m, std::size_t t, Rng& rng,
                                bool unique = false, unsigned enum_cap = kDefaultEnumCap) {
    if (k > n || t > n) throw std::invalid_argument("planted_instance: k and t must be at most n");
    if (unique && n - t > enum_cap) throw std::invalid_argument("planted_instance: uniqueness check exceeds enumeration cap");

    for (std::size_t attempt = 0;; ++attempt) {
        if (attempt > 200000) throw std::runtime_error("planted_instance: uniqueness rejection did not converge");
        BitVec a = BitVec::random(n, rng);

        LinearSystem sys(n);
        auto partial_rank = [&]() {
            auto r = rref(sys);
            return r ? r->rank() : 0;
        };
        while (sys.rows.size() < t) {
            AffineForm row{BitVec::random(n, rng), false};
            row.constant = row.coeffs.dot(a);  // holds at the planted point
            sys.add_row(row);
            if (partial_rank() != sys.rows.size()) sys.rows.pop_back();  // dependent: redraw
        }
        auto space = AffineSubspace::from_system(sys);

        std::vector<Clause> clauses;
        clauses.reserve(m);
        std::vector<std::uint32_t> vars(n);
        for (std::size_t i = 0; i < n; ++i) vars[i] = static_cast<std::uint32_t>(i);
        for (std::size_t ci = 0; ci < m; ++ci) {
            for (std::size_t i = 0; i < k; ++i)
                std::swap(vars[i], vars[i + rng.below(n - i)]);
            Clause c;
            for (std::size_t i = 0; i < k; ++i) c.lits.push_back({vars[i], rng.coin()});
            if (!c.satisfied_by(a)) {
                const std::size_t flip = static_cast<std::size_t>(rng.below(k));
                c.lits[flip].neg = !c.lits[flip].neg;
            }
            clauses.push_back(std::move(c));
        }

        Planted out{SubSatInstance(CnfFormula(n, std::move(clauses)), std::move(space)), a};
        if (!unique) return out;
        std::size_t solutions = 0;
        for_each_point(
            *out.inst.space,
            [&](const BitVec& x) {
                if (out.inst.phi.satisfied_by(x)) ++solutions;
                return solutions < 2;
            },
            enum_cap);
        if (solutions == 1) return out;
    }
}

} // namespace subsat
