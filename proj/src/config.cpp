#include "gpcrbo/config.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace gpcrbo {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

class KeyValues {
public:
    explicit KeyValues(const std::string& text) {
        std::istringstream stream(text);
        std::string line;
        int line_no = 0;
        while (std::getline(stream, line)) {
            ++line_no;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const std::size_t eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
            }
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty() || value.empty()) {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": empty key or value");
            }
            values_[key] = value;
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not a number: " + it->second);
        }
    }

    long get_int(const std::string& key, long fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        try {
            std::size_t pos = 0;
            const long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not an integer: " + it->second);
        }
    }

    bool get_bool(const std::string& key, bool fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("config key '" + key + "': expected true or false");
    }

    void reject_unused() const {
        for (const auto& [key, value] : values_) {
            if (used_.count(key) == 0) {
                throw ConfigError("config key '" + key + "' is not recognized");
            }
        }
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

struct FunctionDefaults {
    double variance = 1.0;
    double lengthscale = 0.2;
    double noise_std = 0.01;
    double prior_mean = 0.0;
    double prior_std = 1.0;
};

FunctionSpec read_function(KeyValues& kv, const std::string& prefix, int dim,
                           const FunctionDefaults& d) {
    FunctionSpec spec;
    const double variance = kv.get_double(prefix + ".kernel.variance", d.variance);
    const double lengthscale = kv.get_double(prefix + ".kernel.lengthscale", d.lengthscale);
    if (!(variance > 0.0) || !(lengthscale > 0.0)) {
        throw ConfigError(prefix + ": kernel variance and lengthscale must be positive");
    }
    spec.kernel = KernelSpec::isometric(variance, lengthscale, dim);
    spec.noise.std_dev = kv.get_double(prefix + ".noise.std", d.noise_std);
    if (spec.noise.std_dev < 0.0) {
        throw ConfigError(prefix + ": noise std must be non-negative");
    }
    spec.prior.mean = kv.get_double(prefix + ".prior.mean", d.prior_mean);
    spec.prior.std_dev = kv.get_double(prefix + ".prior.std", d.prior_std);
    if (!(spec.prior.std_dev > 0.0)) {
        throw ConfigError(prefix + ": threshold prior std must be positive");
    }
    return spec;
}

}  // namespace

SyntheticProblem RunConfig::make_problem() const {
    if (external()) {
        throw InvalidArgumentError("external runs have no built-in problem");
    }
    SyntheticProblem p = problem_by_name(problem);
    p.noise_std = case_config.objective.noise.std_dev;
    return p;
}

RunConfig parse_run_config(const std::string& text) {
    KeyValues kv(text);
    RunConfig out;
    out.problem = kv.get_string("problem", "");
    if (out.problem.empty()) {
        throw ConfigError("config needs a 'problem' (gardner, branin-circle, "
                          "branin-circle-mixed, or external)");
    }

    int default_case = 0;
    int dim = 0;
    int n_level_set = 0;
    int n_binary = 0;
    FunctionDefaults objective_defaults;
    FunctionDefaults constraint_defaults{0.25, 0.35, 0.01, 0.0, 2.0};

    if (out.problem == "gardner") {
        default_case = 1;
        dim = 2;
        objective_defaults = {1.5, 0.3, 0.01, 0.0, 5.0};
    } else if (out.problem == "branin-circle") {
        default_case = 3;
        dim = 2;
        objective_defaults = {400.0, 0.2, 0.01, 0.0, 50.0};
    } else if (out.problem == "branin-circle-mixed") {
        default_case = 4;
        dim = 2;
        objective_defaults = {400.0, 0.2, 0.01, 0.0, 10.0};
    } else if (out.problem == "external") {
        default_case = 1;
        dim = static_cast<int>(kv.get_int("dim", 0));
        if (dim <= 0) {
            throw ConfigError("external configs need a positive 'dim'");
        }
    } else {
        throw ConfigError("unknown problem: " + out.problem);
    }

    const int case_number = static_cast<int>(kv.get_int("case", default_case));
    if (case_number < 1 || case_number > 4) {
        throw ConfigError("'case' must be 1, 2, 3, or 4");
    }
    out.case_config.kind = static_cast<CaseKind>(case_number);

    if (out.problem != "external") {
        const int declared_dim = static_cast<int>(kv.get_int("dim", dim));
        if (declared_dim != dim) {
            throw ConfigError("problem '" + out.problem + "' is " + std::to_string(dim) +
                              "-dimensional");
        }
    }

    // Derive the constraint split from the problem/case pair.
    if (out.problem == "gardner") {
        if (case_number != 1) {
            throw ConfigError("gardner is self-constrained; use case 1");
        }
    } else if (out.problem == "branin-circle") {
        if (case_number == 2) {
            n_binary = 1;
        } else if (case_number == 3) {
            n_level_set = 1;
        } else {
            throw ConfigError("branin-circle supports case 2 (binary circle) or 3 (level set)");
        }
    } else if (out.problem == "branin-circle-mixed") {
        if (case_number != 4) {
            throw ConfigError("branin-circle-mixed is the mixed setup; use case 4");
        }
        n_level_set = 1;
    } else {
        n_level_set = static_cast<int>(kv.get_int("n_level_set", 0));
        n_binary = static_cast<int>(kv.get_int("n_binary", 0));
        if (n_level_set < 0 || n_binary < 0) {
            throw ConfigError("constraint counts must be non-negative");
        }
    }

    out.iterations = static_cast<int>(kv.get_int("iters", 30));
    if (out.iterations < 1) {
        throw ConfigError("'iters' must be at least 1");
    }
    out.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    out.repeats = static_cast<int>(kv.get_int("repeats", 20));
    if (out.repeats < 1) {
        throw ConfigError("'repeats' must be at least 1");
    }
    const std::string method = kv.get_string("method", "mesco");
    if (method == "mesco") {
        out.method = Method::Mesco;
    } else if (method == "random") {
        out.method = Method::RandomSearch;
    } else {
        throw ConfigError("'method' must be mesco or random");
    }

    out.acq.n_samples = static_cast<int>(kv.get_int("samples", 10));
    out.acq.delta = kv.get_double("delta", 0.05);
    out.acq.max_virtual_evals = static_cast<int>(kv.get_int("max_virtual_evals", 200));
    out.acq.restart_tolerance = kv.get_double("restart_tolerance", 1e-3);
    out.acq.n_restarts = static_cast<int>(kv.get_int("restarts", 5));
    out.acq.candidate_grid = static_cast<int>(kv.get_int("candidate_grid", 2000));
    if (out.acq.n_samples < 1 || out.acq.max_virtual_evals < 1 || out.acq.n_restarts < 1 ||
        out.acq.candidate_grid < 1) {
        throw ConfigError("acquisition counts must be positive");
    }
    if (!(out.acq.delta > 0.0 && out.acq.delta < 1.0)) {
        throw ConfigError("'delta' must lie in (0, 1)");
    }
    if (!(out.acq.restart_tolerance > 0.0)) {
        throw ConfigError("'restart_tolerance' must be positive");
    }

    out.case_config.dim = dim;
    out.case_config.n_binary = n_binary;
    out.case_config.evaluate_best_guess = kv.get_bool("evaluate_best_guess", true);
    out.case_config.objective = read_function(kv, "objective", dim, objective_defaults);
    for (int j = 1; j <= n_level_set; ++j) {
        out.case_config.constraints.push_back(
            read_function(kv, "constraint" + std::to_string(j), dim, constraint_defaults));
    }

    out.case_config.ep.tolerance = kv.get_double("ep.tolerance", 1e-6);
    out.case_config.ep.max_sweeps = static_cast<int>(kv.get_int("ep.max_sweeps", 50));
    out.case_config.ep.damping = kv.get_double("ep.damping", 0.8);
    out.case_config.ep.min_cavity_variance = kv.get_double("ep.min_cavity_variance", 1e-10);
    if (!(out.case_config.ep.damping > 0.0 && out.case_config.ep.damping <= 1.0)) {
        throw ConfigError("'ep.damping' must lie in (0, 1]");
    }

    kv.reject_unused();
    try {
        out.case_config.validate();
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(e.what());
    }
    return out;
}

}  // namespace gpcrbo
