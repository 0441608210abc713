// Command-line front end for the gpcrbo shared library: benchmark runs,
// statistical suites, and turn-based ask-tell sessions over stdio. Talks to
// the optimizer exclusively through the C API in gpcrbo.h.

#include <gpcrbo.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { gpcrbo_string_free(value); }
    std::string str() const { return value ? value : ""; }
};

int exit_code_for(gpcrbo_status status) {
    return status == GPCRBO_ERROR_CONFIG || status == GPCRBO_ERROR_INVALID_ARGUMENT ? kExitConfig
                                                                                    : kExitRuntime;
}

// Flag overrides are appended after the file content; the config parser lets
// later keys win.
struct Overrides {
    std::optional<std::string> problem;
    std::optional<int> case_number;
    std::optional<int> iters;
    std::optional<long> seed;
    std::optional<int> repeats;
    std::optional<std::string> method;
    std::optional<int> samples;
    std::optional<double> delta;

    std::string to_text() const {
        std::ostringstream out;
        if (problem) out << "problem = " << *problem << "\n";
        if (case_number) out << "case = " << *case_number << "\n";
        if (iters) out << "iters = " << *iters << "\n";
        if (seed) out << "seed = " << *seed << "\n";
        if (repeats) out << "repeats = " << *repeats << "\n";
        if (method) out << "method = " << *method << "\n";
        if (samples) out << "samples = " << *samples << "\n";
        if (delta) out << "delta = " << *delta << "\n";
        return out.str();
    }
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--problem", o.problem,
                    "gardner | branin-circle | branin-circle-mixed | external");
    cmd->add_option("--case", o.case_number, "modeling case 1-4");
    cmd->add_option("--iters", o.iters, "optimization iterations");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--samples", o.samples, "min-value samples per iteration");
    cmd->add_option("--delta", o.delta, "confidence parameter");
}

int load_config(const std::string& path, const Overrides& overrides, std::string& out) {
    std::ostringstream text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            std::cerr << "error: cannot open config file: " << path << "\n";
            return kExitConfig;
        }
        text << in.rdbuf() << "\n";
    }
    text << overrides.to_text();
    out = text.str();
    if (out.find_first_not_of(" \t\r\n") == std::string::npos) {
        std::cerr << "error: no configuration given; pass --config or --problem\n";
        return kExitConfig;
    }
    return kExitOk;
}

bool write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot write " << path.string() << "\n";
        return false;
    }
    out << content;
    return true;
}

int cmd_bench(const std::string& config_path, const Overrides& overrides,
              const std::string& output_dir) {
    std::string config;
    if (int rc = load_config(config_path, overrides, config); rc != kExitOk) return rc;
    OwnedString csv, summary;
    const gpcrbo_status status = gpcrbo_run_bench(config.c_str(), &csv.value, &summary.value);
    if (status != GPCRBO_OK) {
        std::cerr << "error: " << gpcrbo_last_error() << "\n";
        return exit_code_for(status);
    }
    std::filesystem::create_directories(output_dir);
    const std::filesystem::path dir(output_dir);
    if (!write_file(dir / "run.csv", csv.str()) ||
        !write_file(dir / "summary.json", summary.str())) {
        return kExitRuntime;
    }
    std::cout << summary.str() << "\n";
    return kExitOk;
}

int cmd_stats(const std::string& config_path, const Overrides& overrides,
              const std::string& output_dir) {
    std::string config;
    if (int rc = load_config(config_path, overrides, config); rc != kExitOk) return rc;
    OwnedString mean_csv, median_csv, thresholds_csv, summary;
    const gpcrbo_status status =
        gpcrbo_run_stats(config.c_str(), &mean_csv.value, &median_csv.value,
                         &thresholds_csv.value, &summary.value);
    if (status != GPCRBO_OK) {
        std::cerr << "error: " << gpcrbo_last_error() << "\n";
        return exit_code_for(status);
    }
    std::filesystem::create_directories(output_dir);
    const std::filesystem::path dir(output_dir);
    if (!write_file(dir / "regret_mean.csv", mean_csv.str()) ||
        !write_file(dir / "regret_median.csv", median_csv.str()) ||
        !write_file(dir / "thresholds.csv", thresholds_csv.str()) ||
        !write_file(dir / "summary.json", summary.str())) {
        return kExitRuntime;
    }
    std::cout << summary.str() << "\n";
    return kExitOk;
}

// ---- ask-tell session ----------------------------------------------------

void emit(const json& message) { std::cout << message.dump() << "\n" << std::flush; }

void emit_error(const std::string& message) {
    emit(json{{"type", "error"}, {"msg", message}});
}

class AskTellSession {
public:
    AskTellSession(gpcrbo_session* session, std::filesystem::path dir)
        : session_(session), dir_(std::move(dir)) {
        dim_ = gpcrbo_session_dim(session_);
        n_level_set_ = gpcrbo_session_n_level_set(session_);
        n_binary_ = gpcrbo_session_n_binary(session_);
    }

    int run() {
        std::string line;
        while (true) {
            if (!suggest()) return kExitRuntime;
            bool observed = false;
            while (!observed) {
                if (!std::getline(std::cin, line)) {
                    finish();
                    return kExitOk;
                }
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                if (line == "quit") {
                    finish();
                    return kExitOk;
                }
                json message = json::parse(line, nullptr, false);
                if (message.is_discarded() || !message.is_object() ||
                    !message.contains("type") || !message["type"].is_string()) {
                    emit_error("malformed message; expected a JSON object with a type");
                    continue;
                }
                const std::string type = message["type"];
                if (type == "quit") {
                    finish();
                    return kExitOk;
                }
                if (type == "best_guess") {
                    respond_best_guess();
                    continue;
                }
                if (type == "observe") {
                    observed = handle_observe(message);
                    continue;
                }
                emit_error("unknown message type: " + type);
            }
        }
    }

private:
    bool suggest() {
        std::vector<double> x(dim_);
        if (gpcrbo_session_suggest(session_, x.data()) != GPCRBO_OK) {
            emit_error(gpcrbo_last_error());
            return false;
        }
        emit(json{{"type", "suggest"},
                  {"iter", gpcrbo_session_iteration(session_) + 1},
                  {"x", x}});
        return true;
    }

    void respond_best_guess() {
        std::vector<double> x(dim_);
        if (gpcrbo_session_best_guess(session_, x.data()) != GPCRBO_OK) {
            emit_error(gpcrbo_last_error());
            return;
        }
        emit(json{{"type", "best_guess"}, {"x", x}});
    }

    bool handle_observe(const json& message) {
        int stable = 0;
        double value = 0.0;
        if (message.contains("objective") && message["objective"].is_number()) {
            stable = 1;
            value = message["objective"].get<double>();
        } else if (!message.contains("objective") || message["objective"] != "unstable") {
            emit_error("observe needs an 'objective': a number or \"unstable\"");
            return false;
        }

        const int total = n_level_set_ + n_binary_;
        std::vector<int> ok(std::max(total, 1), 1);
        std::vector<double> values(std::max(total, 1), 0.0);
        if (total > 0) {
            if (!message.contains("constraints") || !message["constraints"].is_array() ||
                static_cast<int>(message["constraints"].size()) != total) {
                emit_error("observe needs a 'constraints' array with " + std::to_string(total) +
                           " entries");
                return false;
            }
            for (int j = 0; j < total; ++j) {
                const json& entry = message["constraints"][j];
                if (entry.is_number()) {
                    ok[j] = 1;
                    values[j] = entry.get<double>();
                } else if (entry == "violated") {
                    ok[j] = 0;
                } else if (entry == "ok" && j >= n_level_set_) {
                    ok[j] = 1;  // satisfied binary constraint carries no value
                } else {
                    emit_error("constraint entries must be numbers, \"violated\", or \"ok\" "
                               "for binary constraints");
                    return false;
                }
            }
        }
        if (gpcrbo_session_observe(session_, stable, value, ok.data(), values.data(), total) !=
            GPCRBO_OK) {
            emit_error(gpcrbo_last_error());
            return false;
        }
        persist_datasets();
        return true;
    }

    void persist_datasets() {
        for (int index = 0; index <= n_level_set_; ++index) {
            OwnedString text;
            if (gpcrbo_session_dataset_json(session_, index, &text.value) != GPCRBO_OK) continue;
            const std::string name =
                index == 0 ? "dataset_objective.json"
                           : "dataset_constraint" + std::to_string(index) + ".json";
            write_file(dir_ / name, text.str());
        }
    }

    void finish() {
        json summary;
        summary["iterations"] = gpcrbo_session_iteration(session_);
        std::vector<double> thresholds(1 + n_level_set_);
        if (gpcrbo_session_thresholds(session_, thresholds.data()) == GPCRBO_OK) {
            for (double& t : thresholds) {
                if (std::isnan(t)) t = 0.0;  // JSON has no NaN; plain-GP objective
            }
            summary["thresholds"] = thresholds;
        }
        if (gpcrbo_session_iteration(session_) > 0) {
            std::vector<double> x(dim_);
            if (gpcrbo_session_best_guess(session_, x.data()) == GPCRBO_OK) {
                summary["best_guess"] = x;
            }
        }
        write_file(dir_ / "summary.json", summary.dump(2));
    }

    gpcrbo_session* session_;
    std::filesystem::path dir_;
    int dim_ = 0;
    int n_level_set_ = 0;
    int n_binary_ = 0;
};

int cmd_asktell(const std::string& config_path, const Overrides& overrides,
                const std::string& output_dir) {
    std::string config;
    if (int rc = load_config(config_path, overrides, config); rc != kExitOk) return rc;
    gpcrbo_session* session = gpcrbo_session_create(config.c_str());
    if (session == nullptr) {
        std::cerr << "error: " << gpcrbo_last_error() << "\n";
        return kExitConfig;
    }
    std::filesystem::create_directories(output_dir);
    AskTellSession loop(session, output_dir);
    const int rc = loop.run();
    gpcrbo_session_free(session);
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GPCR Bayesian optimization with learned failure thresholds"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir = ".";
    Overrides overrides;

    CLI::App* bench = app.add_subcommand("bench", "one seeded benchmark run");
    bench->add_option("--config", config_path, "config file (key = value lines)");
    bench->add_option("--output", output_dir, "output directory");
    add_override_flags(bench, overrides);

    CLI::App* stats = app.add_subcommand("stats", "repeated runs with aggregate regret");
    stats->add_option("--config", config_path, "config file");
    stats->add_option("--output", output_dir, "output directory");
    stats->add_option("--repeats", overrides.repeats, "number of seeded repeats");
    stats->add_option("--method", overrides.method, "mesco | random");
    add_override_flags(stats, overrides);

    CLI::App* asktell = app.add_subcommand("asktell", "line-delimited JSON session on stdio");
    asktell->add_option("--config", config_path, "config file");
    asktell->add_option("--output", output_dir, "directory for persisted datasets");
    add_override_flags(asktell, overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (bench->parsed()) return cmd_bench(config_path, overrides, output_dir);
        if (stats->parsed()) return cmd_stats(config_path, overrides, output_dir);
        if (asktell->parsed()) return cmd_asktell(config_path, overrides, output_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
