#pragma once

#include "gpcrbo/errors.hpp"

namespace gpcrbo {

double norm_pdf(double z);
double norm_log_pdf(double z);
double norm_cdf(double z);

// log Phi(z), finite for |z| <= 38 (and far beyond in the lower tail).
// Accurate to better than 1e-10 relative error on [-10, 10].
double norm_log_cdf(double z);

enum class TruncSide {
    Upper,  // f <= bound
    Lower,  // f >= bound
};

struct TruncatedMoments {
    double log_mass;  // log of the truncated probability
    double mean;
    double variance;
};

// Moments of a N(mu, var) restricted to one side of `bound`. Evaluated
// through norm_log_cdf so the hazard ratio phi/Phi stays finite deep in the
// tail. Below log_mass < -300 the deterministic limit (mean -> bound,
// variance -> 0) is returned.
TruncatedMoments truncated_moments(double mu, double var, double bound, TruncSide side);

}  // namespace gpcrbo
