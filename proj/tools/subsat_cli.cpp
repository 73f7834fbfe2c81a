// Command-line front end: solve instances, run the approximation
// algorithms, generate reduction/benchmark instances, and drive the
// benchmark harness. File formats are documented in the README.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "subsat/bench.hpp"
#include "subsat/dimacs.hpp"
#include "subsat/maxsat.hpp"
#include "subsat/reductions.hpp"
#include "subsat/solvers.hpp"

namespace {

using nlohmann::json;
using namespace subsat;

constexpr int kExitSat = 10;
constexpr int kExitUnsat = 20;
constexpr int kExitUnknown = 30;
constexpr int kExitError = 1;

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << data;
}

std::vector<long long> witness_literals(const BitVec& x) {
    std::vector<long long> lits;
    lits.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        lits.push_back(x.get(i) ? static_cast<long long>(i) + 1 : -(static_cast<long long>(i) + 1));
    return lits;
}

std::string v_line(const BitVec& x) {
    std::ostringstream out;
    out << 'v';
    for (auto l : witness_literals(x)) out << ' ' << l;
    out << " 0";
    return out.str();
}

struct CommonFlags {
    std::uint64_t seed = 1;
    double delta = 0.01;
    std::uint64_t max_iters = 0;
    double nu = 0.5;
    double beta = 1.0;
    std::string format = "human";
    std::string out;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--delta", delta, "target failure probability");
        cmd->add_option("--max-iters", max_iters, "hard iteration cap (0 = none)");
        cmd->add_option("--nu", nu, "plucking threshold");
        cmd->add_option("--beta", beta, "degree-reduction exponent");
        cmd->add_option("--format", format, "output format: human | jsonl")
            ->check(CLI::IsMember({"human", "jsonl"}));
        cmd->add_option("--out", out, "output file (default stdout)");
    }

    SolverBudget budget() const {
        SolverBudget b;
        b.seed = seed;
        b.delta = delta;
        b.max_iterations = max_iters;
        b.nu = nu;
        b.beta = beta;
        return b;
    }
};

int run_solve(const std::string& input, const std::string& algo, const CommonFlags& flags) {
    SubSatInstance inst = parse_dimacs_xor(read_file(input));
    SolverBudget budget = flags.budget();
    SolveResult res;
    if (algo == "brute")
        res = brute_force(inst, budget.enum_cap);
    else if (algo == "ppz")
        res = ppz_filter_solve(inst, budget);
    else if (algo == "codim")
        res = solve_codim_pluck(inst, budget);
    else if (algo == "pluck")
        res = solve_oblivious_pluck(inst, budget);
    else if (algo == "branch")
        res = solve_branch(inst, budget);
    else if (algo == "det2")
        res = solve_2subsat_det(inst, budget);
    else if (algo == "pafdeg") {
        if (inst.trivially_unsat()) {
            res.verdict = Verdict::Unsat;
            res.stats.seed = budget.seed;
            res.stats.note = "defining equations inconsistent";
        } else {
            res = solve_paf_degree_reduction(subsat_to_paf(inst), budget);
        }
    } else {
        throw std::runtime_error("unknown algorithm '" + algo + "'");
    }

    if (res.witness && !inst.satisfied_by(*res.witness)) throw std::runtime_error("witness failed re-verification");

    const int exit_code = res.verdict == Verdict::Sat ? kExitSat : res.verdict == Verdict::Unsat ? kExitUnsat : kExitUnknown;
    std::ostringstream report;
    if (flags.format == "jsonl") {
        json j;
        j["algo"] = algo;
        j["exit"] = exit_code;
        j["iterations"] = res.stats.iterations;
        j["note"] = res.stats.note;
        j["seed"] = flags.seed;
        j["verdict"] = res.verdict == Verdict::Sat ? "sat" : res.verdict == Verdict::Unsat ? "unsat" : "unknown";
        if (res.witness) j["witness"] = witness_literals(*res.witness);
        report << j.dump() << '\n';
    } else {
        report << "c algo=" << algo << " seed=" << flags.seed << " delta=" << flags.delta << '\n';
        report << (res.verdict == Verdict::Sat      ? "s SATISFIABLE"
                   : res.verdict == Verdict::Unsat  ? "s UNSATISFIABLE"
                                                    : "s UNKNOWN")
               << '\n';
        if (res.witness) report << v_line(*res.witness) << '\n';
        report << "c iterations=" << res.stats.iterations << " wall_ms=" << res.stats.wall_ms;
        if (!res.stats.note.empty()) report << " note=\"" << res.stats.note << "\"";
        report << '\n';
    }
    write_output(flags.out, report.str());
    return exit_code;
}

int run_maxsat(const std::string& input, const std::string& algo, const CommonFlags& flags) {
    SubSatInstance inst = parse_dimacs_xor(read_file(input));
    if (inst.trivially_unsat()) throw std::runtime_error("affine space is empty");
    std::optional<MaxResult> res;
    if (algo == "max-rand") {
        Rng rng(flags.seed);
        res = approx_max_random(inst, rng);
    } else if (algo == "max-derand") {
        res = approx_max_derand(inst);
    } else if (algo == "max-sat34") {
        res = satisfiable_threequarters(inst);
        if (!res) throw std::runtime_error("satisfiability premise violated: unary clauses empty the space");
    } else {
        throw std::runtime_error("unknown algorithm '" + algo + "'");
    }

    std::ostringstream report;
    if (flags.format == "jsonl") {
        json j;
        j["algo"] = algo;
        j["bound"] = res->bound;
        j["satisfied"] = res->satisfied;
        j["clauses"] = inst.phi.num_clauses();
        j["seed"] = flags.seed;
        if (algo == "max-sat34") {
            j["absorbed_unary"] = res->absorbed_unary;
            j["residual_clauses"] = res->residual_clauses;
        }
        j["witness"] = witness_literals(res->assignment);
        report << j.dump() << '\n';
    } else {
        report << "c algo=" << algo << '\n';
        report << "o " << res->satisfied << '\n';
        report << "c clauses=" << inst.phi.num_clauses() << " bound=" << res->bound;
        if (algo == "max-sat34")
            report << " absorbed=" << res->absorbed_unary << " residual=" << res->residual_clauses;
        report << '\n';
        report << v_line(res->assignment) << '\n';
    }
    write_output(flags.out, report.str());
    return 0;
}

int run_reduce(const std::string& type, const std::string& graph_path, const std::string& parts_path,
               const std::string& input_path, const std::string& out) {
    SubSatInstance inst;
    if (type == "4col") {
        Graph g = parse_edge_list(read_file(graph_path));
        inst = lower_paf_to_subsat(four_coloring_to_2paf(g)).inst;
    } else if (type == "mcclique") {
        Graph g = parse_edge_list(read_file(graph_path));
        auto parts = parse_partition(read_file(parts_path), g.num_vertices);
        inst = multicolored_clique_to_2subsat(PartitionedGraph(std::move(g), std::move(parts)));
    } else if (type == "oxr") {
        std::size_t n = 0;
        auto triples = parse_oxr(read_file(input_path), n);
        inst = lower_paf_to_subsat(oxr_to_2paf(triples, n)).inst;
    } else if (type == "maxlin2") {
        std::size_t n = 0;
        auto forms = parse_lin_system(read_file(input_path), n);
        inst = lower_paf_to_subsat(maxlin2_to_e2paf(forms)).inst;
    } else {
        throw std::runtime_error("unknown reduction '" + type + "'");
    }
    write_output(out, serialize_dimacs_xor(inst));
    return 0;
}

int run_gen(std::size_t n, std::size_t k, std::size_t m, std::size_t t, std::uint64_t seed, bool unique,
            const std::string& out, const std::string& witness_out) {
    Rng rng(seed);
    Planted planted = planted_instance(n, k, m, t, rng, unique);
    write_output(out, serialize_dimacs_xor(planted.inst));
    if (!witness_out.empty()) write_output(witness_out, v_line(planted.witness) + "\n");
    return 0;
}

int run_bench(const std::string& spec_path, Experiment flags_exp, bool has_flags, const std::string& out, bool fit) {
    Experiment e = flags_exp;
    if (!spec_path.empty()) {
        if (has_flags) throw std::runtime_error("give either --spec or grid flags, not both");
        e = parse_experiment_kv(read_file(spec_path));
    }
    auto rows = run_experiment(e);
    write_output(out, to_csv(rows));
    if (fit) {
        std::vector<double> xs, ys;
        for (const auto& row : rows) {
            if (row.mean_iterations > 0) {
                xs.push_back(static_cast<double>(row.cell.n - row.cell.t));
                ys.push_back(row.mean_iterations);
            }
        }
        auto f = scaling_fit(xs, ys);
        std::cerr << "fit: log2(mean iterations) ~ " << f.slope << " * r + " << f.intercept << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"satisfiability inside affine subspaces of F2^n"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "decide satisfiability within the subspace");
    std::string solve_input, solve_algo = "branch";
    CommonFlags solve_flags;
    solve->add_option("input", solve_input, "DIMACS+XOR file ('-' for stdin)")->required();
    solve->add_option("--algo", solve_algo, "brute | ppz | codim | pluck | branch | det2 | pafdeg")
        ->check(CLI::IsMember({"brute", "ppz", "codim", "pluck", "branch", "det2", "pafdeg"}));
    solve_flags.attach(solve);

    // maxsat
    auto* maxsat = app.add_subcommand("maxsat", "maximize the number of satisfied clauses inside the subspace");
    std::string max_input, max_algo = "max-derand";
    CommonFlags max_flags;
    maxsat->add_option("input", max_input, "DIMACS+XOR file ('-' for stdin)")->required();
    maxsat->add_option("--algo", max_algo, "max-rand | max-derand | max-sat34")
        ->check(CLI::IsMember({"max-rand", "max-derand", "max-sat34"}));
    max_flags.attach(maxsat);

    // reduce
    auto* reduce = app.add_subcommand("reduce", "emit a hardness-reduction instance");
    std::string red_type, red_graph, red_parts, red_input, red_out;
    reduce->add_option("--type", red_type, "4col | mcclique | oxr | maxlin2")->required()
        ->check(CLI::IsMember({"4col", "mcclique", "oxr", "maxlin2"}));
    reduce->add_option("--graph", red_graph, "edge-list file (4col, mcclique)");
    reduce->add_option("--parts", red_parts, "partition file (mcclique)");
    reduce->add_option("--input", red_input, "constraint file (oxr, maxlin2)");
    reduce->add_option("--out", red_out, "output file (default stdout)");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a planted instance");
    std::size_t gen_n = 12, gen_k = 3, gen_m = 40, gen_t = 2;
    std::uint64_t gen_seed = 1;
    bool gen_unique = false;
    std::string gen_out, gen_witness_out;
    gen->add_option("--n", gen_n, "variables");
    gen->add_option("--k", gen_k, "clause width");
    gen->add_option("--m", gen_m, "clauses");
    gen->add_option("--t", gen_t, "co-dimension");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_flag("--unique", gen_unique, "reject until the solution is unique");
    gen->add_option("--out", gen_out, "output file (default stdout)");
    gen->add_option("--witness-out", gen_witness_out, "write the planted witness here");

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark experiment, emit CSV");
    std::string bench_spec, bench_out, bench_algo = "branch", bench_gen = "planted";
    std::vector<std::size_t> bench_n, bench_m, bench_r;
    std::size_t bench_k = 2, bench_t = 0, bench_trials = 20;
    double bench_m_per_n = 0.0, bench_delta = 0.01;
    std::uint64_t bench_seed = 1, bench_max_iters = 0;
    bool bench_unique = false, bench_fit = false;
    bench->add_option("--spec", bench_spec, "key=value experiment file");
    bench->add_option("--algo", bench_algo, "solver id");
    bench->add_option("--gen", bench_gen, "planted | planted-aff");
    bench->add_option("--n-list", bench_n, "variable counts")->delimiter(',');
    bench->add_option("--r-list", bench_r, "free dimensions (planted-aff)")->delimiter(',');
    bench->add_option("--m-list", bench_m, "clause counts (parallel to --n-list)")->delimiter(',');
    bench->add_option("--m-per-n", bench_m_per_n, "clause density (m = round(x*n))");
    bench->add_option("--k", bench_k, "clause width");
    bench->add_option("--t", bench_t, "co-dimension");
    bench->add_option("--trials", bench_trials, "trials per cell");
    bench->add_option("--seed", bench_seed, "experiment seed");
    bench->add_option("--delta", bench_delta, "solver failure probability");
    bench->add_option("--max-iters", bench_max_iters, "per-solve iteration cap");
    bench->add_flag("--unique", bench_unique, "plant unique-solution instances");
    bench->add_flag("--fit", bench_fit, "print a log2 scaling fit to stderr");
    bench->add_option("--out", bench_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(solve_input, solve_algo, solve_flags);
        if (maxsat->parsed()) return run_maxsat(max_input, max_algo, max_flags);
        if (reduce->parsed()) return run_reduce(red_type, red_graph, red_parts, red_input, red_out);
        if (gen->parsed()) return run_gen(gen_n, gen_k, gen_m, gen_t, gen_seed, gen_unique, gen_out, gen_witness_out);
        if (bench->parsed()) {
            Experiment e;
            e.algo = bench_algo;
            e.generator = bench_gen;
            e.trials = bench_trials;
            e.seed = bench_seed;
            e.unique_planted = bench_unique;
            e.delta = bench_delta;
            e.max_iterations = bench_max_iters;
            for (std::size_t i = 0; i < bench_r.size(); ++i) {
                const std::size_t m = i < bench_m.size()
                                          ? bench_m[i]
                                          : static_cast<std::size_t>(std::llround(bench_m_per_n * static_cast<double>(bench_r[i])));
                e.cells.push_back(Experiment::affine_cell(bench_r[i], m));
            }
            for (std::size_t i = 0; i < bench_n.size(); ++i) {
                Experiment::Cell c;
                c.n = bench_n[i];
                c.k = bench_k;
                c.t = bench_t;
                c.m = i < bench_m.size() ? bench_m[i]
                                         : static_cast<std::size_t>(std::llround(bench_m_per_n * static_cast<double>(bench_n[i])));
                e.cells.push_back(c);
            }
            return run_bench(bench_spec, e, !bench_n.empty() || !bench_r.empty(), bench_out, bench_fit);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
