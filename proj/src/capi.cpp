#include "gpcrbo.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "gpcrbo/benchmarks.hpp"
#include "gpcrbo/config.hpp"
#include "gpcrbo/report.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

gpcrbo_status status_of(const std::exception& e) {
    set_error(e.what());
    if (dynamic_cast<const gpcrbo::ConfigError*>(&e)) return GPCRBO_ERROR_CONFIG;
    if (dynamic_cast<const gpcrbo::InvalidArgumentError*>(&e)) return GPCRBO_ERROR_INVALID_ARGUMENT;
    if (dynamic_cast<const gpcrbo::FactorizationError*>(&e)) return GPCRBO_ERROR_FACTORIZATION;
    return GPCRBO_ERROR_RUNTIME;
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
gpcrbo_status guarded(F&& f) {
    try {
        f();
        return GPCRBO_OK;
    } catch (const std::exception& e) {
        return status_of(e);
    } catch (...) {
        set_error("unknown error");
        return GPCRBO_ERROR_RUNTIME;
    }
}

gpcrbo::KernelSpec make_kernel(double variance, double lengthscale, int dim) {
    return gpcrbo::KernelSpec::isometric(variance, lengthscale, dim);
}

}  // namespace

struct gpcrbo_dataset {
    gpcrbo::HybridDataset data;
};

struct gpcrbo_model {
    gpcrbo::GpcrModel model;
};

struct gpcrbo_problem {
    gpcrbo::SyntheticProblem problem;
};

struct gpcrbo_session {
    gpcrbo::RunConfig config;
    gpcrbo::BoSession session;
};

extern "C" {

const char* gpcrbo_last_error(void) { return g_last_error.c_str(); }

void gpcrbo_string_free(char* s) { std::free(s); }

gpcrbo_dataset* gpcrbo_dataset_create(int dim) {
    gpcrbo_dataset* out = nullptr;
    guarded([&] {
        if (dim <= 0) throw gpcrbo::InvalidArgumentError("dataset dimension must be positive");
        out = new gpcrbo_dataset{gpcrbo::HybridDataset(dim)};
    });
    return out;
}

gpcrbo_dataset* gpcrbo_dataset_from_json(const char* json) {
    gpcrbo_dataset* out = nullptr;
    guarded([&] {
        if (json == nullptr) throw gpcrbo::InvalidArgumentError("json must not be null");
        out = new gpcrbo_dataset{gpcrbo::dataset_from_json(json)};
    });
    return out;
}

gpcrbo_status gpcrbo_dataset_add_stable(gpcrbo_dataset* data, const double* x, double y) {
    return guarded([&] {
        if (data == nullptr || x == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        data->data.add_stable(Eigen::Map<const gpcrbo::Vector>(x, data->data.dim), y);
    });
}

gpcrbo_status gpcrbo_dataset_add_unstable(gpcrbo_dataset* data, const double* x) {
    return guarded([&] {
        if (data == nullptr || x == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        data->data.add_unstable(Eigen::Map<const gpcrbo::Vector>(x, data->data.dim));
    });
}

gpcrbo_status gpcrbo_dataset_to_json(const gpcrbo_dataset* data, char** json_out) {
    return guarded([&] {
        if (data == nullptr || json_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        *json_out = copy_string(gpcrbo::dataset_to_json(data->data));
    });
}

int gpcrbo_dataset_dim(const gpcrbo_dataset* data) { return data ? data->data.dim : 0; }
int gpcrbo_dataset_n_stable(const gpcrbo_dataset* data) {
    return data ? data->data.n_stable() : 0;
}
int gpcrbo_dataset_n_unstable(const gpcrbo_dataset* data) {
    return data ? data->data.n_unstable() : 0;
}

void gpcrbo_dataset_free(gpcrbo_dataset* data) { delete data; }

gpcrbo_model* gpcrbo_model_fit(const gpcrbo_dataset* data, double kernel_variance,
                               double kernel_lengthscale, double noise_std, double threshold) {
    gpcrbo_model* out = nullptr;
    guarded([&] {
        if (data == nullptr) throw gpcrbo::InvalidArgumentError("dataset must not be null");
        const auto kernel = make_kernel(kernel_variance, kernel_lengthscale, data->data.dim);
        out = new gpcrbo_model{gpcrbo::GpcrModel::fit(data->data, kernel,
                                                      gpcrbo::NoiseSpec{noise_std}, threshold)};
    });
    return out;
}

gpcrbo_status gpcrbo_model_predict(const gpcrbo_model* model, const double* x, int n_points,
                                   double* mean_out, double* variance_out) {
    return guarded([&] {
        if (model == nullptr || x == nullptr || mean_out == nullptr || variance_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        if (n_points <= 0) throw gpcrbo::InvalidArgumentError("n_points must be positive");
        const int dim = model->model.kernel().dim();
        for (int i = 0; i < n_points; ++i) {
            model->model.predict_one(Eigen::Map<const gpcrbo::Vector>(x + i * dim, dim),
                                     mean_out[i], variance_out[i]);
        }
    });
}

gpcrbo_status gpcrbo_model_prob_stable(const gpcrbo_model* model, const double* x,
                                       double* prob_out) {
    return guarded([&] {
        if (model == nullptr || x == nullptr || prob_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        const int dim = model->model.kernel().dim();
        *prob_out = model->model.prob_stable(Eigen::Map<const gpcrbo::Vector>(x, dim));
    });
}

double gpcrbo_model_threshold(const gpcrbo_model* model) {
    return model ? model->model.threshold() : 0.0;
}

int gpcrbo_model_ep_converged(const gpcrbo_model* model) {
    return model && model->model.ep_converged() ? 1 : 0;
}

void gpcrbo_model_free(gpcrbo_model* model) { delete model; }

gpcrbo_status gpcrbo_threshold_ml(const gpcrbo_dataset* data, double kernel_variance,
                                  double kernel_lengthscale, double noise_std, double lo,
                                  double hi, double* c_out) {
    return guarded([&] {
        if (data == nullptr || c_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        const auto kernel = make_kernel(kernel_variance, kernel_lengthscale, data->data.dim);
        *c_out = gpcrbo::estimate_threshold_ml(data->data, kernel, gpcrbo::NoiseSpec{noise_std},
                                               lo, hi);
    });
}

gpcrbo_status gpcrbo_threshold_map(const gpcrbo_dataset* data, double kernel_variance,
                                   double kernel_lengthscale, double noise_std, double prior_mean,
                                   double prior_std, double* c_out) {
    return guarded([&] {
        if (data == nullptr || c_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        const auto kernel = make_kernel(kernel_variance, kernel_lengthscale, data->data.dim);
        *c_out = gpcrbo::estimate_threshold_map(data->data, kernel, gpcrbo::NoiseSpec{noise_std},
                                                gpcrbo::ThresholdPrior{prior_mean, prior_std});
    });
}

gpcrbo_problem* gpcrbo_problem_create(const char* name) {
    gpcrbo_problem* out = nullptr;
    guarded([&] {
        if (name == nullptr) throw gpcrbo::InvalidArgumentError("name must not be null");
        out = new gpcrbo_problem{gpcrbo::problem_by_name(name)};
    });
    return out;
}

int gpcrbo_problem_dim(const gpcrbo_problem* problem) {
    return problem ? problem->problem.dim : 0;
}

int gpcrbo_problem_n_constraints(const gpcrbo_problem* problem) {
    return problem ? static_cast<int>(problem->problem.constraints.size()) : 0;
}

gpcrbo_status gpcrbo_problem_objective(const gpcrbo_problem* problem, const double* x,
                                       double* value_out) {
    return guarded([&] {
        if (problem == nullptr || x == nullptr || value_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        *value_out = problem->problem.objective(
            Eigen::Map<const gpcrbo::Vector>(x, problem->problem.dim));
    });
}

gpcrbo_status gpcrbo_problem_true_min(const gpcrbo_problem* problem, double* value_out) {
    return guarded([&] {
        if (problem == nullptr || value_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        *value_out = gpcrbo::true_feasible_min(problem->problem).value;
    });
}

void gpcrbo_problem_free(gpcrbo_problem* problem) { delete problem; }

gpcrbo_session* gpcrbo_session_create(const char* config_text) {
    gpcrbo_session* out = nullptr;
    guarded([&] {
        if (config_text == nullptr) {
            throw gpcrbo::InvalidArgumentError("config text must not be null");
        }
        gpcrbo::RunConfig config = gpcrbo::parse_run_config(config_text);
        out = new gpcrbo_session{config,
                                 gpcrbo::BoSession(config.case_config, config.acq, config.seed)};
    });
    return out;
}

int gpcrbo_session_dim(const gpcrbo_session* session) {
    return session ? session->config.case_config.dim : 0;
}

int gpcrbo_session_n_level_set(const gpcrbo_session* session) {
    return session ? session->config.case_config.n_level_set() : 0;
}

int gpcrbo_session_n_binary(const gpcrbo_session* session) {
    return session ? session->config.case_config.n_binary : 0;
}

int gpcrbo_session_iteration(const gpcrbo_session* session) {
    return session ? session->session.iteration() : 0;
}

gpcrbo_status gpcrbo_session_suggest(gpcrbo_session* session, double* x_out) {
    return guarded([&] {
        if (session == nullptr || x_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        const gpcrbo::Vector x = session->session.suggest();
        for (int d = 0; d < x.size(); ++d) x_out[d] = x[d];
    });
}

gpcrbo_status gpcrbo_session_observe(gpcrbo_session* session, int objective_stable,
                                     double objective_value, const int* constraint_ok,
                                     const double* constraint_values, int n_constraints) {
    return guarded([&] {
        if (session == nullptr) throw gpcrbo::InvalidArgumentError("null session");
        const gpcrbo::CaseConfig& cc = session->config.case_config;
        if (n_constraints != cc.n_constraints_total()) {
            throw gpcrbo::InvalidArgumentError("observation: constraint count mismatch");
        }
        if (n_constraints > 0 && constraint_ok == nullptr) {
            throw gpcrbo::InvalidArgumentError("constraint_ok must not be null");
        }
        gpcrbo::CoupledObservation obs;
        if (objective_stable) obs.objective = objective_value;
        obs.constraints.resize(n_constraints);
        for (int j = 0; j < n_constraints; ++j) {
            obs.constraints[j].satisfied = constraint_ok[j] != 0;
            if (j < cc.n_level_set() && obs.constraints[j].satisfied) {
                if (constraint_values == nullptr) {
                    throw gpcrbo::InvalidArgumentError(
                        "constraint_values must not be null with level-set constraints");
                }
                obs.constraints[j].value = constraint_values[j];
            }
        }
        session->session.observe(obs);
    });
}

gpcrbo_status gpcrbo_session_best_guess(gpcrbo_session* session, double* x_out) {
    return guarded([&] {
        if (session == nullptr || x_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        const gpcrbo::Vector x = session->session.current_best_guess();
        for (int d = 0; d < x.size(); ++d) x_out[d] = x[d];
    });
}

gpcrbo_status gpcrbo_session_thresholds(const gpcrbo_session* session, double* c_out) {
    return guarded([&] {
        if (session == nullptr || c_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        c_out[0] = session->session.threshold_objective();
        const auto& cons = session->session.threshold_constraints();
        for (std::size_t j = 0; j < cons.size(); ++j) c_out[j + 1] = cons[j];
    });
}

gpcrbo_status gpcrbo_session_dataset_json(const gpcrbo_session* session, int index,
                                          char** json_out) {
    return guarded([&] {
        if (session == nullptr || json_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        const gpcrbo::BOState& state = session->session.state();
        if (index == 0) {
            *json_out = copy_string(gpcrbo::dataset_to_json(state.objective_data));
        } else if (index >= 1 && index <= static_cast<int>(state.constraint_data.size())) {
            *json_out = copy_string(gpcrbo::dataset_to_json(state.constraint_data[index - 1]));
        } else {
            throw gpcrbo::InvalidArgumentError("dataset index out of range");
        }
    });
}

void gpcrbo_session_free(gpcrbo_session* session) { delete session; }

gpcrbo_status gpcrbo_run_bench(const char* config_text, char** run_csv_out,
                               char** summary_json_out) {
    return guarded([&] {
        if (config_text == nullptr || run_csv_out == nullptr || summary_json_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        const gpcrbo::RunConfig config = gpcrbo::parse_run_config(config_text);
        if (config.external()) {
            throw gpcrbo::ConfigError("bench runs need a built-in problem; use a session for "
                                      "external oracles");
        }
        const gpcrbo::SyntheticProblem problem = config.make_problem();
        const double true_min = gpcrbo::true_feasible_min(problem).value;
        gpcrbo::SyntheticOracle oracle(problem, config.case_config, config.seed);
        const gpcrbo::BOState state =
            gpcrbo::run(config.case_config, oracle, config.iterations, config.acq, config.seed);
        *run_csv_out = copy_string(gpcrbo::run_csv(config, state, true_min));
        *summary_json_out = copy_string(gpcrbo::run_summary_json(config, state, true_min));
    });
}

gpcrbo_status gpcrbo_run_stats(const char* config_text, char** regret_mean_csv_out,
                               char** regret_median_csv_out, char** thresholds_csv_out,
                               char** summary_json_out) {
    return guarded([&] {
        if (config_text == nullptr || regret_mean_csv_out == nullptr ||
            regret_median_csv_out == nullptr || thresholds_csv_out == nullptr ||
            summary_json_out == nullptr) {
            throw gpcrbo::InvalidArgumentError("null argument");
        }
        const gpcrbo::RunConfig config = gpcrbo::parse_run_config(config_text);
        if (config.external()) {
            throw gpcrbo::ConfigError("stats runs need a built-in problem");
        }
        const gpcrbo::SyntheticProblem problem = config.make_problem();
        const gpcrbo::StatsReport report =
            gpcrbo::stats_runner(problem, config.case_config, config.method, config.iterations,
                                 config.repeats, config.acq, config.seed);
        const gpcrbo::StatsArtifacts artifacts = gpcrbo::stats_artifacts(config, report);
        *regret_mean_csv_out = copy_string(artifacts.regret_mean_csv);
        *regret_median_csv_out = copy_string(artifacts.regret_median_csv);
        *thresholds_csv_out = copy_string(artifacts.thresholds_csv);
        *summary_json_out = copy_string(artifacts.summary_json);
    });
}

}  // extern "C"
