#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "subsat/reductions.hpp"
#include "subsat/rng.hpp"
#include "subsat/solvers.hpp"

namespace subsat {

/// One parameter grid swept with planted instances and a fixed algorithm.
/// Per-trial generator and solver seeds derive deterministically from the
/// experiment seed, so a run is reproducible byte for byte. Generators:
/// "planted" (random width-k clauses and equations through a point) and
/// "planted-aff" (width-2 clauses over dense form definitions; cells are
/// built from (r, m) with n = 2m + r and t = 2m).
struct Experiment {
    struct Cell {
        std::size_t n = 0, k = 2, m = 0, t = 0;
    };

    std::string algo = "branch";  // brute | ppz | codim | pluck | branch | det2
    std::string generator = "planted";
    std::vector<Cell> cells;
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    bool unique_planted = false;
    double delta = 0.01;
    std::uint64_t max_iterations = 0;

    static Cell affine_cell(std::size_t r, std::size_t m) { return Cell{2 * m + r, 2, m, 2 * m}; }

    void validate() const {
        if (trials < 1) throw std::invalid_argument("Experiment: trials must be >= 1");
        if (cells.empty()) throw std::invalid_argument("Experiment: empty grid");
        for (const auto& c : cells) {
            if (c.k == 0 || c.k > c.n || c.t > c.n) throw std::invalid_argument("Experiment: bad cell parameters");
            if (generator == "planted-aff" && (c.k != 2 || c.t != 2 * c.m))
                throw std::invalid_argument("Experiment: planted-aff cells must come from affine_cell");
        }
        if (generator != "planted" && generator != "planted-aff")
            throw std::invalid_argument("Experiment: unknown generator '" + generator + "'");
    }
};

struct CellResult {
    Experiment::Cell cell;
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::size_t errors = 0;
    double mean_iterations = 0.0;  // iterations-to-success, averaged over successful trials
    double median_wall_ms = 0.0;   // informational; kept out of the CSV for reproducibility
    double theory = 0.0;           // per-iteration success lower bound, where the analysis gives one
};

namespace benchdetail {

inline SolveResult dispatch(const std::string& algo, const SubSatInstance& inst, const SolverBudget& budget) {
    if (algo == "brute") return brute_force(inst, budget.enum_cap);
    if (algo == "ppz") return ppz_filter_solve(inst, budget);
    if (algo == "codim") return solve_codim_pluck(inst, budget);
    if (algo == "pluck") return solve_oblivious_pluck(inst, budget);
    if (algo == "branch") return solve_branch(inst, budget);
    if (algo == "det2") return solve_2subsat_det(inst, budget);
    throw std::invalid_argument("unknown algorithm '" + algo + "'");
}

inline double theory_bound(const std::string& algo, const Experiment::Cell& c) {
    const double n = static_cast<double>(c.n);
    const double k = static_cast<double>(c.k);
    const double r = static_cast<double>(c.n - c.t);
    if (algo == "branch") {
        const double base = std::exp2(k - 1.0) / (std::exp2(k) - 1.0);
        return std::pow(base, r);
    }
    if (algo == "ppz" || algo == "codim") return std::exp2(-n + n / k) / std::max(1.0, n * n);
    if (algo == "brute" || algo == "det2") return 1.0;
    return 0.0;
}

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace benchdetail

inline std::vector<CellResult> run_experiment(const Experiment& e) {
    e.validate();
    std::vector<CellResult> results;
    results.reserve(e.cells.size());
    Rng master(e.seed);
    for (std::size_t ci = 0; ci < e.cells.size(); ++ci) {
        const auto& cell = e.cells[ci];
        CellResult row;
        row.cell = cell;
        row.trials = e.trials;
        row.theory = benchdetail::theory_bound(e.algo, cell);
        Rng cell_rng = master.stream(ci);
        double iter_sum = 0.0;
        std::vector<double> walls;
        walls.reserve(e.trials);
        for (std::size_t ti = 0; ti < e.trials; ++ti) {
            Rng gen_rng = cell_rng.stream(2 * ti);
            try {
                Planted planted = e.generator == "planted-aff"
                                      ? planted_affine_instance(cell.n - cell.t, cell.m, gen_rng, e.unique_planted)
                                      : planted_instance(cell.n, cell.k, cell.m, cell.t, gen_rng, e.unique_planted);
                SolverBudget budget;
                budget.delta = e.delta;
                budget.seed = cell_rng.stream(2 * ti + 1).next();
                budget.max_iterations = e.max_iterations;
                SolveResult res = benchdetail::dispatch(e.algo, planted.inst, budget);
                walls.push_back(res.stats.wall_ms);
                if (res.verdict == Verdict::Sat) {
                    ++row.successes;
                    iter_sum += static_cast<double>(res.stats.iterations);
                }
            } catch (const std::exception&) {
                ++row.errors;  // recorded per cell, not fatal
            }
        }
        if (row.successes > 0) row.mean_iterations = iter_sum / static_cast<double>(row.successes);
        if (!walls.empty()) {
            std::sort(walls.begin(), walls.end());
            row.median_wall_ms = walls[walls.size() / 2];
        }
        results.push_back(std::move(row));
    }
    std::sort(results.begin(), results.end(), [](const CellResult& a, const CellResult& b) {
        return std::tie(a.cell.n, a.cell.k, a.cell.t, a.cell.m) < std::tie(b.cell.n, b.cell.k, b.cell.t, b.cell.m);
    });
    return results;
}

/// Fixed column set; success rates carry trial counts and a binomial
/// standard error. Wall-clock numbers are deliberately excluded so equal
/// (spec, seed) pairs emit identical bytes.
inline std::string to_csv(std::span<const CellResult> rows) {
    std::ostringstream out;
    out << "n,k,t,m,r,trials,successes,errors,success_rate,std_err,mean_iterations_to_success,theory\n";
    for (const auto& row : rows) {
        const double trials = static_cast<double>(row.trials);
        const double rate = row.trials ? static_cast<double>(row.successes) / trials : 0.0;
        const double se = row.trials ? std::sqrt(std::max(0.0, rate * (1.0 - rate) / trials)) : 0.0;
        out << row.cell.n << ',' << row.cell.k << ',' << row.cell.t << ',' << row.cell.m << ','
            << (row.cell.n - row.cell.t) << ',' << row.trials << ',' << row.successes << ',' << row.errors << ','
            << benchdetail::fmt(rate) << ',' << benchdetail::fmt(se) << ',' << benchdetail::fmt(row.mean_iterations)
            << ',' << benchdetail::fmt(row.theory) << '\n';
    }
    return out.str();
}

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> residuals;  // log2(y) - fitted, per point
};

/// Least-squares fit of log2(y) against x. Needs >= 3 points with varying x
/// and positive y.
inline ScalingFit scaling_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3) throw std::invalid_argument("scaling_fit: need >= 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(ys[i] > 0.0)) throw std::invalid_argument("scaling_fit: nonpositive value");
        const double y = std::log2(ys[i]);
        sx += xs[i];
        sy += y;
        sxx += xs[i] * xs[i];
        sxy += xs[i] * y;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12) throw std::invalid_argument("scaling_fit: degenerate grid");
    ScalingFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.residuals.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        fit.residuals.push_back(std::log2(ys[i]) - (fit.slope * xs[i] + fit.intercept));
    return fit;
}

struct ParseErrorKv : std::invalid_argument {
    explicit ParseErrorKv(std::size_t line)
        : std::invalid_argument("experiment spec: bad line " + std::to_string(line)) {}
};

/// Flat key=value experiment spec. Keys: algo, trials, seed, delta, unique,
/// max_iterations, k, t, n_list (comma separated), m_list (parallel to
/// n_list) or m_per_n (clause density multiplier, rounded).
inline Experiment parse_experiment_kv(std::string_view text) {
    Experiment e;
    std::vector<std::size_t> n_list, m_list, r_list;
    double m_per_n = 0.0;
    std::size_t k = 2, t = 0;

    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseErrorKv(line_no);
        const std::string key(line.substr(0, eq));
        const std::string val(line.substr(eq + 1));
        auto parse_list = [](const std::string& s) {
            std::vector<std::size_t> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(static_cast<std::size_t>(std::stoull(item)));
            return out;
        };
        if (key == "algo")
            e.algo = val;
        else if (key == "generator")
            e.generator = val;
        else if (key == "r_list")
            r_list = parse_list(val);
        else if (key == "trials")
            e.trials = std::stoull(val);
        else if (key == "seed")
            e.seed = std::stoull(val);
        else if (key == "delta")
            e.delta = std::stod(val);
        else if (key == "unique")
            e.unique_planted = val == "1" || val == "true";
        else if (key == "max_iterations")
            e.max_iterations = std::stoull(val);
        else if (key == "k")
            k = std::stoull(val);
        else if (key == "t")
            t = std::stoull(val);
        else if (key == "n_list")
            n_list = parse_list(val);
        else if (key == "m_list")
            m_list = parse_list(val);
        else if (key == "m_per_n")
            m_per_n = std::stod(val);
        else
            throw ParseErrorKv(line_no);
    }
    if (e.generator == "planted-aff") {
        if (!m_list.empty() && m_list.size() != r_list.size())
            throw std::invalid_argument("experiment spec: m_list must parallel r_list");
        for (std::size_t i = 0; i < r_list.size(); ++i) {
            const std::size_t m = !m_list.empty()
                                      ? m_list[i]
                                      : static_cast<std::size_t>(std::llround(m_per_n * static_cast<double>(r_list[i])));
            e.cells.push_back(Experiment::affine_cell(r_list[i], m));
        }
        return e;
    }
    if (!m_list.empty() && m_list.size() != n_list.size())
        throw std::invalid_argument("experiment spec: m_list must parallel n_list");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        Experiment::Cell c;
        c.n = n_list[i];
        c.k = k;
        c.t = t;
        c.m = !m_list.empty() ? m_list[i] : static_cast<std::size_t>(std::llround(m_per_n * static_cast<double>(n_list[i])));
        e.cells.push_back(c);
    }
    return e;
}

} // namespace subsat
