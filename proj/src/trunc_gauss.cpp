#include "gpcrbo/trunc_gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpcrbo {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)
constexpr double kInvSqrt2 = 0.7071067811865476;

// Mills-ratio continued fraction R(t) = Q(t)/phi(t) for the upper tail
// Q(t) = 1 - Phi(t), valid for t > 0:
//   R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...))))
// Evaluated by backward recursion; converges quickly for t >= 6.
double mills_ratio_cf(double t) {
    double r = 0.0;
    for (int k = 200; k >= 1; --k) {
        r = static_cast<double>(k) / (t + r);
    }
    return 1.0 / (t + r);
}

}  // namespace

double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) * 0.3989422804014327;
}

double norm_log_pdf(double z) {
    if (std::isinf(z)) return -std::numeric_limits<double>::infinity();
    return -0.5 * z * z - kHalfLog2Pi;
}

double norm_cdf(double z) {
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

double norm_log_cdf(double z) {
    if (std::isnan(z)) return z;
    if (z >= 6.0) {
        // log(1 - Q) with Q = Phi(-z) tiny; log1p keeps full precision.
        return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
    }
    if (z >= -6.0) {
        return std::log(0.5 * std::erfc(-z * kInvSqrt2));
    }
    // Deep lower tail: Phi(z) = phi(-z) * R(-z). Stays finite long past the
    // point where erfc underflows (z ~ -37.5).
    const double t = -z;
    if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
    return -0.5 * t * t - kHalfLog2Pi + std::log(mills_ratio_cf(t));
}

TruncatedMoments truncated_moments(double mu, double var, double bound, TruncSide side) {
    if (!(var > 0.0)) {
        throw InvalidArgumentError("truncated_moments needs a positive variance");
    }
    const double sigma = std::sqrt(var);
    // Reduce the Lower case to the Upper one by reflection.
    const double beta =
        side == TruncSide::Upper ? (bound - mu) / sigma : (mu - bound) / sigma;
    const double log_mass = norm_log_cdf(beta);
    if (log_mass < -300.0) {
        return TruncatedMoments{log_mass, bound, 0.0};
    }
    const double hazard = std::exp(norm_log_pdf(beta) - log_mass);
    if (!(hazard > 0.0)) {
        // No effective truncation (bound far on the permissive side).
        return TruncatedMoments{log_mass, mu, var};
    }
    const double shift = sigma * hazard;
    const double mean = side == TruncSide::Upper ? mu - shift : mu + shift;
    double factor = 1.0 - beta * hazard - hazard * hazard;
    factor = std::clamp(factor, 0.0, 1.0);
    return TruncatedMoments{log_mass, mean, var * factor};
}

}  // namespace gpcrbo
