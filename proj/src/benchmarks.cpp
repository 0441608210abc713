#include "gpcrbo/benchmarks.hpp"

#include <algorithm>
#include <cmath>

namespace gpcrbo {

SyntheticProblem gardner2d() {
    SyntheticProblem p;
    p.name = "gardner";
    p.dim = 2;
    p.objective = [](const Vector& x) {
        return std::cos(10.0 * x[0]) * std::cos(5.0 * x[1]) + std::sin(10.0 * x[0]) + 2.0;
    };
    p.self_threshold = 1.5;
    p.noise_std = 0.01;
    return p;
}

namespace {

double branin_value(const Vector& x) {
    const double x1 = 15.0 * x[0] - 5.0;
    const double x2 = 15.0 * x[1];
    const double a = x2 - 5.1 / (4.0 * M_PI * M_PI) * x1 * x1 + 5.0 / M_PI * x1 - 6.0;
    return a * a + 10.0 * (1.0 - 1.0 / (8.0 * M_PI)) * std::cos(x1) + 10.0;
}

std::optional<double> circle_value(const Vector& x) {
    const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
    const double inside = 2.0 / 9.0 - r2;
    if (inside < 0.0) return std::nullopt;
    return -std::sqrt(inside);
}

}  // namespace

SyntheticProblem branin_circle() {
    SyntheticProblem p;
    p.name = "branin-circle";
    p.dim = 2;
    p.objective = branin_value;
    p.constraints.push_back(circle_value);
    p.noise_std = 0.01;
    return p;
}

SyntheticProblem branin_circle_mixed() {
    SyntheticProblem p = branin_circle();
    p.name = "branin-circle-mixed";
    p.self_threshold = 20.0;
    return p;
}

SyntheticProblem problem_by_name(const std::string& name) {
    if (name == "gardner") return gardner2d();
    if (name == "branin-circle") return branin_circle();
    if (name == "branin-circle-mixed") return branin_circle_mixed();
    throw InvalidArgumentError("unknown problem: " + name);
}

Example1d example_1d() {
    Example1d ex;
    ex.data = HybridDataset(1);
    ex.data.add_stable(Vector::Constant(1, 0.1), 0.5);
    ex.data.add_stable(Vector::Constant(1, 0.3), 2.0);
    ex.data.add_stable(Vector::Constant(1, 0.5), 1.0);
    ex.data.add_unstable(Vector::Constant(1, 0.7));
    ex.data.add_unstable(Vector::Constant(1, 0.9));
    ex.kernel = KernelSpec::isometric(0.5, 0.2, 1);
    ex.noise = NoiseSpec{0.02};
    return ex;
}

namespace {

bool is_feasible(const SyntheticProblem& problem, const Vector& x, double objective_value) {
    if (objective_value > problem.self_threshold) return false;
    for (const auto& constraint : problem.constraints) {
        if (!constraint(x).has_value()) return false;
    }
    return true;
}

}  // namespace

FeasibleMinimum true_feasible_min(const SyntheticProblem& problem, int grid_per_dim) {
    if (problem.dim > 3) {
        throw InvalidArgumentError("true_feasible_min: dense grids support dimension <= 3");
    }
    if (grid_per_dim < 2) {
        throw InvalidArgumentError("true_feasible_min: need at least two grid points per axis");
    }
    const int d = problem.dim;
    long total = 1;
    for (int i = 0; i < d; ++i) total *= grid_per_dim;

    FeasibleMinimum best;
    best.value = std::numeric_limits<double>::infinity();
    Vector x(d);
    for (long index = 0; index < total; ++index) {
        long rest = index;
        for (int i = 0; i < d; ++i) {
            x[i] = static_cast<double>(rest % grid_per_dim) / (grid_per_dim - 1);
            rest /= grid_per_dim;
        }
        const double value = problem.objective(x);
        if (value < best.value && is_feasible(problem, x, value)) {
            best.value = value;
            best.location = x;
        }
    }
    if (!std::isfinite(best.value)) {
        throw Error("true_feasible_min: no feasible grid point found");
    }

    // Local descent from the best grid point, staying feasible.
    double step = 1.0 / (grid_per_dim - 1);
    while (step > 1e-9) {
        bool improved = false;
        for (int i = 0; i < d; ++i) {
            for (int sign : {+1, -1}) {
                Vector xt = best.location;
                xt[i] = std::clamp(xt[i] + sign * step, 0.0, 1.0);
                const double value = problem.objective(xt);
                if (value < best.value && is_feasible(problem, xt, value)) {
                    best.value = value;
                    best.location = xt;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

std::vector<double> inference_regret(const std::vector<double>& y_bg_trace, double true_min) {
    std::vector<double> out(y_bg_trace.size());
    std::transform(y_bg_trace.begin(), y_bg_trace.end(), out.begin(),
                   [true_min](double y) { return y - true_min; });
    return out;
}

SyntheticOracle::SyntheticOracle(const SyntheticProblem& problem, const CaseConfig& config,
                                 std::uint64_t seed)
    : problem_(&problem),
      n_level_set_(config.n_level_set()),
      n_binary_(config.n_binary),
      rng_(Rng(seed).sub("oracle-noise")) {
    if (static_cast<int>(problem.constraints.size()) != n_level_set_ + n_binary_) {
        throw InvalidArgumentError("oracle: problem/case constraint count mismatch");
    }
    if (problem.dim != config.dim) {
        throw InvalidArgumentError("oracle: problem/case dimension mismatch");
    }
}

CoupledObservation SyntheticOracle::conduct_experiment(const Vector& x) {
    CoupledObservation obs;
    const double f = problem_->objective(x);
    if (f <= problem_->self_threshold) {
        obs.objective = f + problem_->noise_std * rng_.normal();
    } else {
        rng_.normal();  // keep the noise stream aligned across outcomes
        obs.objective = std::nullopt;
    }
    obs.constraints.resize(problem_->constraints.size());
    for (std::size_t j = 0; j < problem_->constraints.size(); ++j) {
        const std::optional<double> raw = problem_->constraints[j](x);
        ConstraintObservation& c = obs.constraints[j];
        c.satisfied = raw.has_value();
        if (static_cast<int>(j) < n_level_set_) {
            const double noise = problem_->noise_std * rng_.normal();
            if (raw.has_value()) {
                c.value = *raw + noise;
            }
        }
    }
    return obs;
}

BaselineTrace random_search_baseline(const SyntheticProblem& problem, int iterations,
                                     std::uint64_t seed) {
    Rng root(seed);
    Rng proposals = root.sub("random-search");
    Rng noise = root.sub("random-search-noise");
    BaselineTrace trace;
    bool have_best = false;
    Vector best_x(problem.dim);
    double best_y = std::numeric_limits<double>::infinity();
    for (int t = 0; t < iterations; ++t) {
        Vector x(problem.dim);
        for (int d = 0; d < problem.dim; ++d) {
            x[d] = proposals.uniform();
        }
        const double f = problem.objective(x);
        if (is_feasible(problem, x, f)) {
            const double y = f + problem.noise_std * noise.normal();
            ++trace.n_feasible;
            if (!have_best || y < best_y) {
                have_best = true;
                best_y = y;
                best_x = x;
            }
        } else {
            noise.normal();
        }
        if (have_best) {
            trace.x_bg.push_back(best_x);
            trace.y_bg.push_back(problem.objective(best_x) + problem.noise_std * noise.normal());
        } else {
            trace.x_bg.emplace_back();
            trace.y_bg.push_back(std::numeric_limits<double>::quiet_NaN());
            noise.normal();
        }
    }
    return trace;
}

namespace {

double nan_aware_mean(const std::vector<double>& values) {
    double sum = 0.0;
    int count = 0;
    for (double v : values) {
        if (!std::isnan(v)) {
            sum += v;
            ++count;
        }
    }
    return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

double nan_aware_median(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return std::isnan(v); }),
                 values.end());
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double nan_aware_std(const std::vector<double>& values) {
    const double mean = nan_aware_mean(values);
    if (std::isnan(mean)) return mean;
    double sum = 0.0;
    int count = 0;
    for (double v : values) {
        if (!std::isnan(v)) {
            sum += (v - mean) * (v - mean);
            ++count;
        }
    }
    return count > 1 ? std::sqrt(sum / (count - 1)) : 0.0;
}

}  // namespace

StatsReport stats_runner(const SyntheticProblem& problem, const CaseConfig& config, Method method,
                         int iterations, int repeats, const AcquisitionConfig& acq,
                         std::uint64_t seed) {
    if (repeats < 1) {
        throw InvalidArgumentError("stats_runner needs at least one repeat");
    }
    StatsReport report;
    report.iterations = iterations;
    report.repeats = repeats;
    report.true_min = true_feasible_min(problem).value;

    const int m = config.n_level_set();
    std::vector<std::vector<double>> regret(iterations);             // [iteration][run]
    std::vector<std::vector<double>> thr_obj(iterations);            // [iteration][run]
    std::vector<std::vector<std::vector<double>>> thr_con(m, std::vector<std::vector<double>>(iterations));

    Rng root(seed);
    for (int r = 0; r < repeats; ++r) {
        const std::uint64_t run_seed = root.sub("run", static_cast<std::uint64_t>(r)).next_u64();
        if (method == Method::RandomSearch) {
            const BaselineTrace trace = random_search_baseline(problem, iterations, run_seed);
            for (int t = 0; t < iterations; ++t) {
                regret[t].push_back(trace.y_bg[t] - report.true_min);
            }
            report.final_regrets.push_back(trace.y_bg.back() - report.true_min);
            if (trace.x_bg.back().size() > 0) {
                report.final_best_values.push_back(problem.objective(trace.x_bg.back()));
            } else {
                report.final_best_values.push_back(std::numeric_limits<double>::quiet_NaN());
            }
            continue;
        }

        SyntheticOracle oracle(problem, config, run_seed);
        BOState state;
        try {
            state = run(config, oracle, iterations, acq, run_seed);
        } catch (const std::exception&) {
            ++report.failed_runs;
            continue;
        }
        if (!state.error.empty() || state.iterations < iterations) {
            ++report.failed_runs;
            continue;
        }
        for (int t = 0; t < iterations; ++t) {
            const IterationRecord& rec = state.records[t];
            regret[t].push_back(rec.y_bg - report.true_min);
            thr_obj[t].push_back(rec.threshold_objective);
            for (int j = 0; j < m; ++j) {
                thr_con[j][t].push_back(rec.threshold_constraints[j]);
            }
        }
        report.final_regrets.push_back(state.records.back().y_bg - report.true_min);
        report.final_best_values.push_back(problem.objective(state.records.back().x_bg));
        report.mean_stable += state.objective_data.n_stable();
        report.mean_unstable += state.objective_data.n_unstable();
    }

    const int ok = repeats - report.failed_runs;
    if (method == Method::Mesco && ok > 0) {
        report.mean_stable /= ok;
        report.mean_unstable /= ok;
    }
    for (int t = 0; t < iterations; ++t) {
        report.mean_regret.push_back(nan_aware_mean(regret[t]));
        report.median_regret.push_back(nan_aware_median(regret[t]));
        if (method == Method::Mesco) {
            report.mean_threshold_objective.push_back(nan_aware_mean(thr_obj[t]));
            report.std_threshold_objective.push_back(nan_aware_std(thr_obj[t]));
        }
    }
    if (method == Method::Mesco) {
        report.mean_threshold_constraints.resize(m);
        report.std_threshold_constraints.resize(m);
        for (int j = 0; j < m; ++j) {
            for (int t = 0; t < iterations; ++t) {
                report.mean_threshold_constraints[j].push_back(nan_aware_mean(thr_con[j][t]));
                report.std_threshold_constraints[j].push_back(nan_aware_std(thr_con[j][t]));
            }
            report.final_threshold_constraint_mean.push_back(
                report.mean_threshold_constraints[j].back());
            report.final_threshold_constraint_std.push_back(
                report.std_threshold_constraints[j].back());
        }
        if (!report.mean_threshold_objective.empty()) {
            report.final_threshold_objective_mean = report.mean_threshold_objective.back();
            report.final_threshold_objective_std = report.std_threshold_objective.back();
        }
    }
    return report;
}

}  // namespace gpcrbo
