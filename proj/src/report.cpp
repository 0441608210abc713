#include "gpcrbo/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace gpcrbo {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    // Prefer the shortest representation that still round-trips.
    for (int precision = 1; precision < 17; ++precision) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", precision, v);
        if (std::strtod(shorter, nullptr) == v) {
            return shorter;
        }
    }
    return buffer;
}

namespace {

std::vector<std::string> csv_header(const RunConfig& config) {
    std::vector<std::string> cols;
    cols.push_back("iter");
    const int d = config.case_config.dim;
    for (int i = 0; i < d; ++i) cols.push_back("x" + std::to_string(i));
    cols.push_back("y");
    for (int j = 1; j <= config.case_config.n_constraints_total(); ++j) {
        cols.push_back("g" + std::to_string(j));
    }
    if (config.case_config.objective_is_gpcr()) cols.push_back("c_hat");
    for (int j = 1; j <= config.case_config.n_level_set(); ++j) {
        cols.push_back("c_hat" + std::to_string(j));
    }
    for (int i = 0; i < d; ++i) cols.push_back("xbg" + std::to_string(i));
    cols.push_back("y_bg");
    cols.push_back("regret");
    return cols;
}

std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

}  // namespace

std::string run_csv(const RunConfig& config, const BOState& state, double true_min) {
    std::string out = join(csv_header(config));
    const int d = config.case_config.dim;
    const int n_level_set = config.case_config.n_level_set();
    for (const IterationRecord& rec : state.records) {
        std::vector<std::string> cells;
        cells.push_back(std::to_string(rec.iteration));
        for (int i = 0; i < d; ++i) cells.push_back(format_double(rec.x_next[i]));
        cells.push_back(rec.observation.objective ? format_double(*rec.observation.objective)
                                                  : "unstable");
        for (std::size_t j = 0; j < rec.observation.constraints.size(); ++j) {
            const ConstraintObservation& c = rec.observation.constraints[j];
            if (!c.satisfied) {
                cells.push_back("violated");
            } else if (static_cast<int>(j) < n_level_set) {
                cells.push_back(format_double(c.value.value_or(
                    std::numeric_limits<double>::quiet_NaN())));
            } else {
                cells.push_back("ok");
            }
        }
        if (config.case_config.objective_is_gpcr()) {
            cells.push_back(format_double(rec.threshold_objective));
        }
        for (double c : rec.threshold_constraints) {
            cells.push_back(format_double(c));
        }
        for (int i = 0; i < d; ++i) cells.push_back(format_double(rec.x_bg[i]));
        cells.push_back(format_double(rec.y_bg));
        cells.push_back(format_double(rec.y_bg - true_min));
        out += join(cells);
    }
    return out;
}

std::string run_summary_json(const RunConfig& config, const BOState& state, double true_min) {
    nlohmann::json j;
    j["problem"] = config.problem;
    j["case"] = static_cast<int>(config.case_config.kind);
    j["iterations"] = state.iterations;
    j["seed"] = config.seed;
    j["counts"]["stable"] = state.objective_data.n_stable();
    j["counts"]["unstable"] = state.objective_data.n_unstable();
    for (std::size_t k = 0; k < state.constraint_data.size(); ++k) {
        const std::string key = "constraint" + std::to_string(k + 1);
        j["counts"][key]["stable"] = state.constraint_data[k].n_stable();
        j["counts"][key]["unstable"] = state.constraint_data[k].n_unstable();
    }
    int nonconverged = 0;
    for (const IterationRecord& rec : state.records) {
        if (!rec.ep_converged) ++nonconverged;
    }
    j["ep_nonconverged_iterations"] = nonconverged;
    if (!state.records.empty()) {
        const IterationRecord& last = state.records.back();
        j["final"]["x_bg"] = std::vector<double>(last.x_bg.begin(), last.x_bg.end());
        if (!std::isnan(last.y_bg)) j["final"]["y_bg"] = last.y_bg;
        if (config.case_config.objective_is_gpcr()) {
            j["final"]["c_hat"] = last.threshold_objective;
        }
        for (std::size_t k = 0; k < last.threshold_constraints.size(); ++k) {
            j["final"]["c_hat" + std::to_string(k + 1)] = last.threshold_constraints[k];
        }
        if (!std::isnan(true_min)) {
            j["true_min"] = true_min;
            if (!std::isnan(last.y_bg)) j["final"]["regret"] = last.y_bg - true_min;
        }
    }
    if (!state.error.empty()) j["error"] = state.error;
    return j.dump(2);
}

StatsArtifacts stats_artifacts(const RunConfig& config, const StatsReport& report) {
    StatsArtifacts out;
    out.regret_mean_csv = "iter,mean_regret\n";
    out.regret_median_csv = "iter,median_regret\n";
    for (int t = 0; t < report.iterations; ++t) {
        out.regret_mean_csv +=
            std::to_string(t + 1) + "," + format_double(report.mean_regret[t]) + "\n";
        out.regret_median_csv +=
            std::to_string(t + 1) + "," + format_double(report.median_regret[t]) + "\n";
    }

    std::ostringstream thr;
    thr << "iter";
    const bool has_objective = !report.mean_threshold_objective.empty();
    if (has_objective) thr << ",c_hat_mean,c_hat_std";
    for (std::size_t j = 0; j < report.mean_threshold_constraints.size(); ++j) {
        thr << ",c_hat" << (j + 1) << "_mean,c_hat" << (j + 1) << "_std";
    }
    thr << "\n";
    for (int t = 0; t < report.iterations; ++t) {
        thr << (t + 1);
        if (has_objective) {
            thr << "," << format_double(report.mean_threshold_objective[t]) << ","
                << format_double(report.std_threshold_objective[t]);
        }
        for (std::size_t j = 0; j < report.mean_threshold_constraints.size(); ++j) {
            thr << "," << format_double(report.mean_threshold_constraints[j][t]) << ","
                << format_double(report.std_threshold_constraints[j][t]);
        }
        thr << "\n";
    }
    out.thresholds_csv = thr.str();

    nlohmann::json j;
    j["problem"] = config.problem;
    j["case"] = static_cast<int>(config.case_config.kind);
    j["method"] = config.method == Method::Mesco ? "mesco" : "random";
    j["iterations"] = report.iterations;
    j["repeats"] = report.repeats;
    j["failed_runs"] = report.failed_runs;
    j["true_min"] = report.true_min;
    if (!report.final_regrets.empty()) {
        j["final_regret"]["mean"] = [&] {
            double s = 0;
            int n = 0;
            for (double v : report.final_regrets)
                if (!std::isnan(v)) {
                    s += v;
                    ++n;
                }
            return n ? s / n : std::numeric_limits<double>::quiet_NaN();
        }();
        j["final_regret"]["median"] = report.median_regret.empty()
                                          ? std::numeric_limits<double>::quiet_NaN()
                                          : report.median_regret.back();
    }
    if (!std::isnan(report.final_threshold_objective_mean)) {
        j["final_c_hat"]["mean"] = report.final_threshold_objective_mean;
        j["final_c_hat"]["std"] = report.final_threshold_objective_std;
    }
    for (std::size_t k = 0; k < report.final_threshold_constraint_mean.size(); ++k) {
        const std::string key = "final_c_hat" + std::to_string(k + 1);
        j[key]["mean"] = report.final_threshold_constraint_mean[k];
        j[key]["std"] = report.final_threshold_constraint_std[k];
    }
    j["mean_stable"] = report.mean_stable;
    j["mean_unstable"] = report.mean_unstable;
    out.summary_json = j.dump(2);
    return out;
}

}  // namespace gpcrbo
