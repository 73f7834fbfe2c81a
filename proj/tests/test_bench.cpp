#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "subsat/bench.hpp"

using namespace subsat;

namespace {

Experiment small_branch_experiment() {
    Experiment e;
    e.algo = "branch";
    e.trials = 10;
    e.seed = 42;
    e.delta = 0.01;
    for (std::size_t n : {6, 8, 10}) e.cells.push_back({n, 2, 2 * n, 1});
    return e;
}

} // namespace

TEST(Experiment, Validation) {
    Experiment e;
    e.cells.push_back({6, 2, 12, 0});
    e.trials = 0;
    EXPECT_THROW(e.validate(), std::invalid_argument);
    e.trials = 1;
    e.cells.clear();
    EXPECT_THROW(e.validate(), std::invalid_argument);
    e.cells.push_back({4, 6, 8, 0});  // k > n
    EXPECT_THROW(e.validate(), std::invalid_argument);
}

TEST(Experiment, DeterministicCsv) {
    Experiment e = small_branch_experiment();
    const auto rows1 = run_experiment(e);
    const auto rows2 = run_experiment(e);
    EXPECT_EQ(to_csv(rows1), to_csv(rows2));
}

TEST(Experiment, CsvShape) {
    Experiment e = small_branch_experiment();
    const std::string csv = to_csv(run_experiment(e));
    EXPECT_EQ(csv.find("n,k,t,m,r,trials,successes,errors,success_rate,std_err,mean_iterations_to_success,theory"), 0u);
    // one header plus one line per cell, LF endings
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Experiment, PlantedInstancesMostlySolve) {
    Experiment e = small_branch_experiment();
    for (const auto& row : run_experiment(e)) {
        EXPECT_EQ(row.errors, 0u);
        EXPECT_GE(row.successes + 1, row.trials);  // delta = 0.01 per trial
        EXPECT_GT(row.theory, 0.0);
        // run success rate clears the per-iteration bound with room to spare
        const double rate = static_cast<double>(row.successes) / static_cast<double>(row.trials);
        const double se = std::sqrt(std::max(row.theory * (1.0 - row.theory), 1e-9) / static_cast<double>(row.trials));
        EXPECT_GE(rate, row.theory - 3.0 * se);
    }
}

TEST(Experiment, RowsSortedByParameters) {
    Experiment e = small_branch_experiment();
    std::swap(e.cells[0], e.cells[2]);
    const auto rows = run_experiment(e);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i - 1].cell.n, rows[i].cell.n);
}

TEST(ScalingFit, RecoversExactExponentialSlope) {
    // y = 4 * 1.5^x
    std::vector<double> xs{10, 12, 14, 16};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(4.0 * std::pow(1.5, x));
    auto fit = scaling_fit(xs, ys);
    EXPECT_NEAR(fit.slope, std::log2(1.5), 1e-9);
    for (double r : fit.residuals) EXPECT_NEAR(r, 0.0, 1e-9);
}

TEST(ScalingFit, ConstantSeriesHasZeroSlope) {
    std::vector<double> xs{1, 2, 3, 4};
    std::vector<double> ys{7, 7, 7, 7};
    EXPECT_NEAR(scaling_fit(xs, ys).slope, 0.0, 1e-12);
}

TEST(ScalingFit, DegenerateGridRejected) {
    std::vector<double> xs{3, 3, 3};
    std::vector<double> ys{1, 2, 4};
    EXPECT_THROW(scaling_fit(xs, ys), std::invalid_argument);
    std::vector<double> two_x{1, 2};
    std::vector<double> two_y{1, 2};
    EXPECT_THROW(scaling_fit(two_x, two_y), std::invalid_argument);
}

TEST(ExperimentSpec, ParsesKeyValueFile) {
    const std::string text =
        "# comment\n"
        "algo=branch\n"
        "k=2\n"
        "t=1\n"
        "n_list=6,8,10\n"
        "m_per_n=2.0\n"
        "trials=5\n"
        "seed=99\n"
        "unique=true\n";
    Experiment e = parse_experiment_kv(text);
    EXPECT_EQ(e.algo, "branch");
    ASSERT_EQ(e.cells.size(), 3u);
    EXPECT_EQ(e.cells[1].n, 8u);
    EXPECT_EQ(e.cells[1].m, 16u);
    EXPECT_EQ(e.cells[1].t, 1u);
    EXPECT_TRUE(e.unique_planted);
    EXPECT_EQ(e.seed, 99u);
    EXPECT_THROW(parse_experiment_kv("bogus line\n"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_kv("n_list=4,6\nm_list=8\n"), std::invalid_argument);
}

TEST(Experiment, ErrorsRecordedNotFatal) {
    Experiment e;
    e.algo = "det2";
    e.trials = 3;
    e.cells.push_back({8, 3, 16, 0});  // width-3 clauses: det2 rejects them
    const auto rows = run_experiment(e);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].errors, 3u);
    EXPECT_EQ(rows[0].successes, 0u);
}
