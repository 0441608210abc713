#pragma once

#include <string>

#include "gpcrbo/benchmarks.hpp"

namespace gpcrbo {

// One fully validated run description, assembled from the flat key = value
// config format plus per-problem defaults.
struct RunConfig {
    std::string problem;  // gardner | branin-circle | branin-circle-mixed | external
    int iterations = 30;
    std::uint64_t seed = 0;
    int repeats = 20;
    Method method = Method::Mesco;
    AcquisitionConfig acq;
    CaseConfig case_config;

    bool external() const { return problem == "external"; }
    SyntheticProblem make_problem() const;  // throws for external configs
};

// Parses the flat dotted key = value text ('#' starts a comment, later keys
// win). Unknown keys, missing required fields, and incompatible
// problem/case combinations throw ConfigError.
RunConfig parse_run_config(const std::string& text);

}  // namespace gpcrbo
