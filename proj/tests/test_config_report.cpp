#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "gpcrbo/config.hpp"
#include "gpcrbo/report.hpp"

using namespace gpcrbo;

TEST_CASE("config parsing and defaults") {
    SUBCASE("gardner defaults") {
        const RunConfig cfg = parse_run_config("problem = gardner\n");
        CHECK(cfg.case_config.kind == CaseKind::SelfConstrained);
        CHECK(cfg.case_config.dim == 2);
        CHECK(cfg.case_config.objective.kernel.variance == 1.5);
        CHECK(cfg.case_config.objective.prior.std_dev == 5.0);
        CHECK(cfg.iterations == 30);
        CHECK(cfg.acq.delta == 0.05);
        CHECK(cfg.acq.n_samples == 10);
    }
    SUBCASE("branin level-set defaults") {
        const RunConfig cfg = parse_run_config("problem = branin-circle\n");
        CHECK(cfg.case_config.kind == CaseKind::LevelSetOnly);
        REQUIRE(cfg.case_config.n_level_set() == 1);
        CHECK(cfg.case_config.constraints[0].prior.std_dev == 2.0);
        CHECK(cfg.case_config.constraints[0].kernel.variance == 0.25);
        CHECK(cfg.case_config.constraints[0].kernel.lengthscales[0] == 0.35);
    }
    SUBCASE("mixed preset") {
        const RunConfig cfg = parse_run_config("problem = branin-circle-mixed\n");
        CHECK(cfg.case_config.kind == CaseKind::Mixed);
        CHECK(cfg.case_config.objective.prior.std_dev == 10.0);
        CHECK(cfg.case_config.n_level_set() == 1);
    }
    SUBCASE("binary case for branin") {
        const RunConfig cfg = parse_run_config("problem = branin-circle\ncase = 2\n");
        CHECK(cfg.case_config.kind == CaseKind::BinaryOnly);
        CHECK(cfg.case_config.n_binary == 1);
        CHECK(cfg.case_config.n_level_set() == 0);
        CHECK(cfg.case_config.objective.prior.std_dev == 50.0);
    }
    SUBCASE("overrides, comments, and later keys winning") {
        const RunConfig cfg = parse_run_config(
            "problem = gardner\n"
            "# a comment line\n"
            "iters = 12   # trailing comment\n"
            "objective.kernel.lengthscale = 0.3\n"
            "seed = 99\n"
            "seed = 100\n");
        CHECK(cfg.iterations == 12);
        CHECK(cfg.case_config.objective.kernel.lengthscales[0] == 0.3);
        CHECK(cfg.seed == 100);
    }
    SUBCASE("external configs declare their own shape") {
        const RunConfig cfg = parse_run_config(
            "problem = external\n"
            "dim = 3\n"
            "case = 4\n"
            "n_level_set = 1\n"
            "n_binary = 2\n"
            "constraint1.prior.std = 1.5\n");
        CHECK(cfg.external());
        CHECK(cfg.case_config.dim == 3);
        CHECK(cfg.case_config.n_level_set() == 1);
        CHECK(cfg.case_config.n_binary == 2);
        CHECK(cfg.case_config.constraints[0].prior.std_dev == 1.5);
        CHECK_THROWS_AS(cfg.make_problem(), InvalidArgumentError);
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(parse_run_config(""), ConfigError);
        CHECK_THROWS_AS(parse_run_config("problem = nonesuch\n"), ConfigError);
        CHECK_THROWS_AS(parse_run_config("problem = gardner\ncase = 3\n"), ConfigError);
        CHECK_THROWS_AS(parse_run_config("problem = gardner\nunknown_key = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_run_config("problem = gardner\niters = zero\n"), ConfigError);
        CHECK_THROWS_AS(parse_run_config("problem = gardner\ndelta = 1.5\n"), ConfigError);
        CHECK_THROWS_AS(parse_run_config("problem = gardner\ndim = 3\n"), ConfigError);
        CHECK_THROWS_AS(parse_run_config("problem = external\ncase = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_run_config("problem = gardner\nbroken line\n"), ConfigError);
    }
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

bool parses_as_number(const std::string& cell) {
    char* end = nullptr;
    std::strtod(cell.c_str(), &end);
    return end == cell.c_str() + cell.size() && !cell.empty();
}

}  // namespace

TEST_CASE("run_csv schema and parse-back") {
    const RunConfig cfg = parse_run_config(
        "problem = branin-circle\niters = 4\nseed = 9\nsamples = 3\ncandidate_grid = 200\n"
        "max_virtual_evals = 40\n");
    const SyntheticProblem problem = cfg.make_problem();
    SyntheticOracle oracle(problem, cfg.case_config, cfg.seed);
    const BOState state = run(cfg.case_config, oracle, cfg.iterations, cfg.acq, cfg.seed);
    const double true_min = true_feasible_min(problem).value;
    const std::string csv = run_csv(cfg, state, true_min);

    std::stringstream ss(csv);
    std::string line;
    REQUIRE(std::getline(ss, line));
    const auto header = split(line);
    // iter, x0, x1, y, g1, c_hat1, xbg0, xbg1, y_bg, regret
    CHECK(header.size() == 10);
    CHECK(header[0] == "iter");
    CHECK(header[4] == "g1");
    CHECK(header[5] == "c_hat1");

    int rows = 0;
    while (std::getline(ss, line)) {
        const auto cells = split(line);
        REQUIRE(cells.size() == header.size());
        ++rows;
        CHECK(parses_as_number(cells[0]));
        for (std::size_t i = 1; i < cells.size(); ++i) {
            const bool label = cells[i] == "unstable" || cells[i] == "violated" ||
                               cells[i] == "ok" || cells[i] == "nan";
            CHECK((label || parses_as_number(cells[i])));
        }
    }
    CHECK(rows == 4);

    // Doubles round-trip exactly through the formatter.
    CHECK(std::strtod(format_double(state.records[0].x_next[0]).c_str(), nullptr) ==
          state.records[0].x_next[0]);
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");

    const std::string summary = run_summary_json(cfg, state, true_min);
    CHECK(summary.find("\"final\"") != std::string::npos);
}

TEST_CASE("gardner csv carries the objective threshold column") {
    const RunConfig cfg = parse_run_config(
        "problem = gardner\niters = 2\nsamples = 3\ncandidate_grid = 150\nmax_virtual_evals = 30\n");
    const SyntheticProblem problem = cfg.make_problem();
    SyntheticOracle oracle(problem, cfg.case_config, cfg.seed);
    const BOState state = run(cfg.case_config, oracle, cfg.iterations, cfg.acq, cfg.seed);
    const std::string csv = run_csv(cfg, state, true_feasible_min(problem).value);
    std::stringstream ss(csv);
    std::string header;
    std::getline(ss, header);
    // iter, x0, x1, y, c_hat, xbg0, xbg1, y_bg, regret
    CHECK(split(header).size() == 9);
    CHECK(header.find("c_hat") != std::string::npos);
    CHECK(header.find(",g1,") == std::string::npos);
}

TEST_CASE("stats artifacts") {
    const RunConfig cfg = parse_run_config(
        "problem = gardner\niters = 3\nrepeats = 2\nsamples = 3\ncandidate_grid = 150\n"
        "max_virtual_evals = 30\n");
    const SyntheticProblem problem = cfg.make_problem();
    const StatsReport report = stats_runner(problem, cfg.case_config, cfg.method, cfg.iterations,
                                            cfg.repeats, cfg.acq, cfg.seed);
    const StatsArtifacts artifacts = stats_artifacts(cfg, report);

    std::stringstream mean_ss(artifacts.regret_mean_csv);
    std::string line;
    std::getline(mean_ss, line);
    CHECK(line == "iter,mean_regret");
    int rows = 0;
    while (std::getline(mean_ss, line)) ++rows;
    CHECK(rows == 3);

    std::stringstream thr_ss(artifacts.thresholds_csv);
    std::getline(thr_ss, line);
    CHECK(line == "iter,c_hat_mean,c_hat_std");
    CHECK(artifacts.summary_json.find("\"true_min\"") != std::string::npos);
}
