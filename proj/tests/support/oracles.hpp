#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check: adaptive quadrature for scalar truncated moments,
// rejection sampling for box-truncated multivariate Gaussians, and
// closed-form GP regression.

#include <cmath>
#include <functional>
#include <vector>

#include "gpcrbo/ep.hpp"
#include "gpcrbo/rng.hpp"

namespace oracles {

using gpcrbo::Matrix;
using gpcrbo::Vector;

// Adaptive Simpson integration.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                 int depth = 30);

struct ScalarMoments {
    double mass;
    double mean;
    double variance;
};

// Moments of N(mu, var) truncated to one side of `bound`, by quadrature over
// an 80-sigma-wide window.
ScalarMoments truncated_moments_quadrature(double mu, double var, double bound, bool upper);

struct SampleStats {
    Vector mean;
    Vector std_dev;
    double log_mass;  // log acceptance rate
    long accepted;
};

// Draw from N(mean, cov) and keep samples inside the box defined by the site
// directions at `threshold`; runs until `target_accepted` draws are kept or
// `max_draws` proposals are spent.
SampleStats rejection_sample(const gpcrbo::TiltedBase& base,
                             const std::vector<gpcrbo::SiteDirection>& directions,
                             double threshold, long target_accepted, long max_draws,
                             gpcrbo::Rng& rng);

struct GpPrediction {
    Vector mean;
    Vector variance;
};

// Textbook GP regression: K_* (K + sigma^2 I)^-1 y and the matching variance.
GpPrediction gp_regression(const gpcrbo::KernelSpec& kernel, double noise_std, const Matrix& x,
                           const Vector& y, const Matrix& x_test);

}  // namespace oracles
