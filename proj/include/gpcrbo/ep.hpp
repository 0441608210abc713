#pragma once

#include <vector>

#include "gpcrbo/kernels.hpp"

namespace gpcrbo {

// Which half-space a data point's step factor keeps.
enum class SiteDirection {
    Stable,    // factor H(c - f_i): mass below the threshold
    Unstable,  // factor H(f_i - c): mass above the threshold
};

// Exact Gaussian obtained by folding the Gaussian observation likelihood of
// the stable points into the prior. EP then only has to handle the N step
// factors on top of this base.
struct TiltedBase {
    Vector mean;        // m~
    Matrix covariance;  // Sigma~
    double log_norm;    // log of the Gaussian-product constant (threshold independent)

    Eigen::Index dim() const { return mean.size(); }
};

struct EPConfig {
    double tolerance = 1e-6;  // max site-parameter change per sweep
    int max_sweeps = 50;
    double damping = 0.8;
    double min_cavity_variance = 1e-10;
};

struct EPResult {
    Vector mean;          // mu_EP
    Matrix covariance;    // Sigma_EP
    double log_mass;      // log Z_EP, includes the base log_norm
    bool converged = false;
    int sweeps_used = 0;
    int skipped_updates = 0;
    // Converged site natural parameters exp(nu f - tau f^2 / 2), one per
    // coordinate; downstream predictions treat them as Gaussian
    // pseudo-observations.
    Vector site_tau;
    Vector site_nu;
};

// Folds N(y_s | f_s, diag(noise^2)) into N(f | 0, prior). The first n_stable
// indices of the prior must correspond to the stable points; noise_std gives
// one entry per stable point.
TiltedBase tilted_base(const Matrix& prior, const Vector& stable_y, const Vector& noise_std);

TiltedBase tilted_base(const Matrix& prior, const Vector& stable_y, const NoiseSpec& noise,
                       int n_stable);

// Gaussian-site EP over per-coordinate step factors at a shared threshold.
// Sites are swept in index order with damped updates until the largest
// site-parameter change falls below config.tolerance.
EPResult ep_box_posterior(const TiltedBase& base, const std::vector<SiteDirection>& directions,
                          double threshold, const EPConfig& config = {});

// log F(c): one EP solve, returning only the mass.
double log_mass_at(const TiltedBase& base, const std::vector<SiteDirection>& directions,
                   double threshold, const EPConfig& config = {});

}  // namespace gpcrbo
