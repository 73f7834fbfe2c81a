#pragma once

#include <charconv>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "subsat/cnf.hpp"
#include "subsat/f2.hpp"
#include "subsat/instance.hpp"
#include "subsat/reductions.hpp"

namespace subsat {

struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(std::size_t ln, const std::string& what)
        : std::runtime_error("line " + std::to_string(ln) + ": " + what), line(ln) {}
};

namespace iodetail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

inline std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline long long to_int(std::string_view tok, std::size_t line_no) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line_no, "expected an integer, got '" + std::string(tok) + "'");
    return v;
}

// Signed-literal list terminated by 0.
inline std::vector<long long> literal_list(const std::vector<std::string_view>& toks, std::size_t first,
                                           std::size_t line_no) {
    std::vector<long long> lits;
    bool closed = false;
    for (std::size_t i = first; i < toks.size(); ++i) {
        const long long v = to_int(toks[i], line_no);
        if (v == 0) {
            if (i + 1 != toks.size()) throw ParseError(line_no, "tokens after terminating 0");
            closed = true;
            break;
        }
        lits.push_back(v);
    }
    if (!closed) throw ParseError(line_no, "missing terminating 0");
    return lits;
}

inline Literal to_literal(long long v, std::size_t n, std::size_t line_no) {
    const unsigned long long var = static_cast<unsigned long long>(v < 0 ? -v : v);
    if (var > n) throw ParseError(line_no, "variable index " + std::to_string(var) + " exceeds declared count");
    return {static_cast<std::uint32_t>(var - 1), v < 0};
}

} // namespace iodetail

/// DIMACS CNF with supplementary XOR lines. The header stays "p cnf n m"
/// with m counting clause lines only. A line "x l1 ... lk 0" asserts that
/// the XOR of the listed literals is true (a negative index negates the
/// variable); each such line contributes one defining equation of the
/// space. An inconsistent equation set parses fine and yields an instance
/// that is trivially unsatisfiable.
inline SubSatInstance parse_dimacs_xor(std::string_view text) {
    std::size_t n = 0;
    long long declared_clauses = -1;
    std::vector<Clause> clauses;
    std::vector<AffineForm> rows;
    bool saw_header = false;

    const auto lines = iodetail::split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        auto toks = iodetail::tokens(lines[ln]);
        if (toks.empty() || toks[0] == "c") continue;
        if (toks[0] == "p") {
            if (saw_header) throw ParseError(line_no, "duplicate header");
            if (toks.size() != 4 || toks[1] != "cnf") throw ParseError(line_no, "expected 'p cnf <vars> <clauses>'");
            const long long nv = iodetail::to_int(toks[2], line_no);
            declared_clauses = iodetail::to_int(toks[3], line_no);
            if (nv < 0 || declared_clauses < 0) throw ParseError(line_no, "negative counts in header");
            n = static_cast<std::size_t>(nv);
            saw_header = true;
            continue;
        }
        if (!saw_header) throw ParseError(line_no, "clause before header");
        if (toks[0] == "x") {
            auto lits = iodetail::literal_list(toks, 1, line_no);
            AffineForm row(n);
            bool parity = true;  // xor of literals = 1
            for (auto v : lits) {
                const Literal l = iodetail::to_literal(v, n, line_no);
                row.coeffs.flip(l.var);
                if (l.neg) parity = !parity;
            }
            row.constant = parity;  // sum of variables = parity, i.e. sum + parity = 0
            rows.push_back(std::move(row));
        } else {
            auto lits = iodetail::literal_list(toks, 0, line_no);
            Clause c;
            for (auto v : lits) c.lits.push_back(iodetail::to_literal(v, n, line_no));
            clauses.push_back(std::move(c));
        }
    }
    if (!saw_header) throw ParseError(lines.size(), "missing header");
    if (declared_clauses != static_cast<long long>(clauses.size()))
        throw ParseError(lines.size(), "header declares " + std::to_string(declared_clauses) + " clauses, found " +
                                           std::to_string(clauses.size()));
    return SubSatInstance(CnfFormula(n, std::move(clauses)), AffineSubspace::from_system(LinearSystem(n, std::move(rows))));
}

inline std::string serialize_dimacs_xor(const SubSatInstance& inst) {
    std::ostringstream out;
    out << "p cnf " << inst.n() << ' ' << inst.phi.num_clauses() << '\n';
    for (const auto& c : inst.phi.clauses()) {
        for (const auto& l : c.lits) out << (l.neg ? -static_cast<long long>(l.var) - 1 : static_cast<long long>(l.var) + 1) << ' ';
        out << "0\n";
    }
    if (inst.space) {
        for (const auto& row : inst.space->system().rows) {
            out << 'x';
            bool first = true;
            for (std::size_t i = 0; i < inst.n(); ++i) {
                if (!row.coeffs.get(i)) continue;
                // an even-parity equation is written with its first literal negated
                const bool negate = first && !row.constant;
                out << ' ' << (negate ? -static_cast<long long>(i) - 1 : static_cast<long long>(i) + 1);
                first = false;
            }
            out << " 0\n";
        }
    } else {
        // canonical inconsistent pair: x1 = 0 and x1 = 1 (or 0 = 1 when n = 0)
        if (inst.n() == 0) throw std::invalid_argument("serialize_dimacs_xor: empty space over zero variables");
        out << "x -1 0\nx 1 0\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Auxiliary input formats for the reduction generators.

/// Edge list: first line "V E", then E lines "u v" with 0-indexed endpoints.
inline Graph parse_edge_list(std::string_view text) {
    const auto lines = iodetail::split_lines(text);
    std::size_t ln = 0;
    auto next_tokens = [&]() -> std::vector<std::string_view> {
        while (ln < lines.size()) {
            auto t = iodetail::tokens(lines[ln++]);
            if (!t.empty() && t[0] != "c") return t;
        }
        return {};
    };
    auto head = next_tokens();
    if (head.size() != 2) throw ParseError(ln, "expected 'V E' header");
    const long long v = iodetail::to_int(head[0], ln);
    const long long e = iodetail::to_int(head[1], ln);
    if (v < 0 || e < 0) throw ParseError(ln, "negative counts");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (long long i = 0; i < e; ++i) {
        auto t = next_tokens();
        if (t.size() != 2) throw ParseError(ln, "expected 'u v'");
        const long long a = iodetail::to_int(t[0], ln);
        const long long b = iodetail::to_int(t[1], ln);
        if (a < 0 || b < 0 || a >= v || b >= v) throw ParseError(ln, "vertex out of range");
        edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
    }
    return Graph(static_cast<std::size_t>(v), std::move(edges));
}

inline std::string serialize_edge_list(const Graph& g) {
    std::ostringstream out;
    out << g.num_vertices << ' ' << g.edges.size() << '\n';
    for (const auto& [a, b] : g.edges) out << a << ' ' << b << '\n';
    return out.str();
}

/// Partition: one line per part, space-separated 0-indexed vertex ids.
inline std::vector<std::vector<std::uint32_t>> parse_partition(std::string_view text, std::size_t num_vertices) {
    std::vector<std::vector<std::uint32_t>> parts;
    const auto lines = iodetail::split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto toks = iodetail::tokens(lines[ln]);
        if (toks.empty() || toks[0] == "c") continue;
        std::vector<std::uint32_t> part;
        for (auto tok : toks) {
            const long long v = iodetail::to_int(tok, ln + 1);
            if (v < 0 || static_cast<std::size_t>(v) >= num_vertices) throw ParseError(ln + 1, "vertex out of range");
            part.push_back(static_cast<std::uint32_t>(v));
        }
        parts.push_back(std::move(part));
    }
    return parts;
}

/// Affine equation system: header "p lin n m", then m lines of signed
/// literals terminated by 0, each read as "xor of the literals = 1". The
/// returned forms are the equations' left-hand sides (form = 0).
inline std::vector<AffineForm> parse_lin_system(std::string_view text, std::size_t& n_out) {
    const auto lines = iodetail::split_lines(text);
    std::vector<AffineForm> forms;
    std::size_t n = 0;
    long long declared = -1;
    bool saw_header = false;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        auto toks = iodetail::tokens(lines[ln]);
        if (toks.empty() || toks[0] == "c") continue;
        if (toks[0] == "p") {
            if (toks.size() != 4 || toks[1] != "lin") throw ParseError(line_no, "expected 'p lin <vars> <equations>'");
            n = static_cast<std::size_t>(iodetail::to_int(toks[2], line_no));
            declared = iodetail::to_int(toks[3], line_no);
            saw_header = true;
            continue;
        }
        if (!saw_header) throw ParseError(line_no, "equation before header");
        auto lits = iodetail::literal_list(toks, 0, line_no);
        AffineForm row(n);
        bool parity = true;
        for (auto v : lits) {
            const Literal l = iodetail::to_literal(v, n, line_no);
            row.coeffs.flip(l.var);
            if (l.neg) parity = !parity;
        }
        row.constant = parity;
        forms.push_back(std::move(row));
    }
    if (!saw_header) throw ParseError(lines.size(), "missing header");
    if (declared != static_cast<long long>(forms.size())) throw ParseError(lines.size(), "equation count mismatch");
    n_out = n;
    return forms;
}

/// OXR constraints: header "p oxr n m", then m lines "l1 l2 l3 0".
inline std::vector<OxrTriple> parse_oxr(std::string_view text, std::size_t& n_out) {
    const auto lines = iodetail::split_lines(text);
    std::vector<OxrTriple> triples;
    std::size_t n = 0;
    long long declared = -1;
    bool saw_header = false;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        auto toks = iodetail::tokens(lines[ln]);
        if (toks.empty() || toks[0] == "c") continue;
        if (toks[0] == "p") {
            if (toks.size() != 4 || toks[1] != "oxr") throw ParseError(line_no, "expected 'p oxr <vars> <constraints>'");
            n = static_cast<std::size_t>(iodetail::to_int(toks[2], line_no));
            declared = iodetail::to_int(toks[3], line_no);
            saw_header = true;
            continue;
        }
        if (!saw_header) throw ParseError(line_no, "constraint before header");
        auto lits = iodetail::literal_list(toks, 0, line_no);
        if (lits.size() != 3) throw ParseError(line_no, "expected exactly three literals");
        triples.push_back({iodetail::to_literal(lits[0], n, line_no), iodetail::to_literal(lits[1], n, line_no),
                           iodetail::to_literal(lits[2], n, line_no)});
    }
    if (!saw_header) throw ParseError(lines.size(), "missing header");
    if (declared != static_cast<long long>(triples.size())) throw ParseError(lines.size(), "constraint count mismatch");
    n_out = n;
    return triples;
}

} // namespace subsat
