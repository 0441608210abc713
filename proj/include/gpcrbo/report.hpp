#pragma once

#include <string>

#include "gpcrbo/config.hpp"

namespace gpcrbo {

// Shortest representation that round-trips a double exactly; NaN -> "nan".
std::string format_double(double v);

// Per-iteration CSV of one run. Columns: iter, x0.., y (value or "unstable"),
// g1.. (value, "ok" for satisfied binary constraints, or "violated"),
// c_hat.. (objective first when GPCR-modeled, then level-set constraints),
// xbg0.., y_bg, regret.
std::string run_csv(const RunConfig& config, const BOState& state, double true_min);

std::string run_summary_json(const RunConfig& config, const BOState& state, double true_min);

struct StatsArtifacts {
    std::string regret_mean_csv;
    std::string regret_median_csv;
    std::string thresholds_csv;
    std::string summary_json;
};

StatsArtifacts stats_artifacts(const RunConfig& config, const StatsReport& report);

}  // namespace gpcrbo
