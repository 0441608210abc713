#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpcrbo/bo.hpp"

namespace gpcrbo {

// A synthetic test problem on the unit hypercube. Constraints return a value
// when satisfied and nothing when violated; whether they are modeled as
// level-set or binary is the case configuration's business.
struct SyntheticProblem {
    std::string name;
    int dim = 0;
    std::function<double(const Vector&)> objective;  // noiseless
    double self_threshold = std::numeric_limits<double>::infinity();
    std::vector<std::function<std::optional<double>(const Vector&)>> constraints;
    double noise_std = 0.01;
};

// cos(10 x1) cos(5 x2) + sin(10 x1) + 2, self-constrained at c = 1.5.
SyntheticProblem gardner2d();

// Rescaled Branin-Hoo constrained to the centered circle of radius sqrt(2/9);
// the constraint value is -sqrt(2/9 - r^2), undefined outside the circle.
SyntheticProblem branin_circle();

// Branin treated as self-constrained at c = 20 on top of the circle.
SyntheticProblem branin_circle_mixed();

SyntheticProblem problem_by_name(const std::string& name);

// Fixed 1-D five-point dataset with its model hyperparameters.
struct Example1d {
    HybridDataset data;
    KernelSpec kernel;
    NoiseSpec noise;
};
Example1d example_1d();

struct FeasibleMinimum {
    double value = 0.0;
    Vector location;
};

// Brute-force minimum of the noiseless objective over feasible grid points,
// refined by a local pattern search from the best grid point. Supports
// dimension <= 3.
FeasibleMinimum true_feasible_min(const SyntheticProblem& problem, int grid_per_dim = 1000);

std::vector<double> inference_regret(const std::vector<double>& y_bg_trace, double true_min);

// In-process oracle wrapping a synthetic problem: objective instability comes
// from the self threshold, constraint observations follow the case split into
// level-set and binary.
class SyntheticOracle : public Oracle {
public:
    SyntheticOracle(const SyntheticProblem& problem, const CaseConfig& config, std::uint64_t seed);
    CoupledObservation conduct_experiment(const Vector& x) override;

private:
    const SyntheticProblem* problem_;
    int n_level_set_;
    int n_binary_;
    Rng rng_;
};

struct BaselineTrace {
    std::vector<Vector> x_bg;     // best feasible point so far (empty until one exists)
    std::vector<double> y_bg;     // fresh noisy evaluation of it (NaN sentinel before)
    int n_feasible = 0;
};

// Uniform random proposals; the best guess is the best feasible point
// observed so far.
BaselineTrace random_search_baseline(const SyntheticProblem& problem, int iterations,
                                     std::uint64_t seed);

enum class Method { Mesco, RandomSearch };

struct StatsReport {
    int iterations = 0;
    int repeats = 0;
    int failed_runs = 0;
    std::vector<double> mean_regret;    // per iteration, NaN-aware
    std::vector<double> median_regret;  // per iteration, NaN-aware
    std::vector<double> mean_threshold_objective;
    std::vector<double> std_threshold_objective;
    std::vector<std::vector<double>> mean_threshold_constraints;  // [constraint][iteration]
    std::vector<std::vector<double>> std_threshold_constraints;
    double final_threshold_objective_mean = std::numeric_limits<double>::quiet_NaN();
    double final_threshold_objective_std = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> final_threshold_constraint_mean;
    std::vector<double> final_threshold_constraint_std;
    std::vector<double> final_regrets;      // one per successful run
    std::vector<double> final_best_values;  // noiseless objective at final x_bg
    double mean_stable = 0.0;
    double mean_unstable = 0.0;
    double true_min = std::numeric_limits<double>::quiet_NaN();
};

// n_repeats independent seeded runs of the chosen method, aggregated.
StatsReport stats_runner(const SyntheticProblem& problem, const CaseConfig& config, Method method,
                         int iterations, int repeats, const AcquisitionConfig& acq,
                         std::uint64_t seed);

}  // namespace gpcrbo
