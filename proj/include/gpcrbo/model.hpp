#pragma once

#include <limits>
#include <string>
#include <vector>

#include "gpcrbo/ep.hpp"
#include "gpcrbo/kernels.hpp"

namespace gpcrbo {

// Stable (x, y) pairs plus unstable x-only labels.
struct HybridDataset {
    int dim = 0;
    Matrix stable_x;    // n_stable x dim
    Vector stable_y;    // n_stable
    Matrix unstable_x;  // n_unstable x dim

    HybridDataset() = default;
    explicit HybridDataset(int dimension) : dim(dimension) {}

    int n_stable() const { return static_cast<int>(stable_x.rows()); }
    int n_unstable() const { return static_cast<int>(unstable_x.rows()); }
    int n_total() const { return n_stable() + n_unstable(); }

    void add_stable(const Vector& x, double y);
    void add_unstable(const Vector& x);

    // All points, stable indices first.
    Matrix all_x() const;

    void validate() const;
};

// JSON form: {"dim": D, "stable": [{"x": [...], "y": v}, ...],
//             "unstable": [{"x": [...]}, ...]}
std::string dataset_to_json(const HybridDataset& data);
HybridDataset dataset_from_json(const std::string& text);

struct ThresholdPrior {
    double mean = 0.0;
    double std_dev = 1.0;
};

struct PredictiveMoments {
    Vector mean;
    Vector variance;
};

// Threshold value meaning "no truncation": with no unstable points the model
// degenerates to exact GP regression and EP is skipped.
inline constexpr double kNoThreshold = std::numeric_limits<double>::infinity();

// Fitted model: EP posterior over the latent values at the data points plus
// everything needed to answer predictions cheaply. Immutable once fitted;
// predict/prob_stable are safe to call concurrently.
class GpcrModel {
public:
    GpcrModel() = default;

    static GpcrModel fit(const HybridDataset& data, const KernelSpec& kernel,
                         const NoiseSpec& noise, double threshold, const EPConfig& ep = {});

    PredictiveMoments predict(const Matrix& x_test) const;
    void predict_one(const Vector& x, double& mean, double& variance) const;

    // Phi((c_hat - mu(x)) / sigma(x)).
    double prob_stable(const Vector& x) const;

    // Offline diagnostic: unnormalized predictive density on a grid of
    // latent values, one EP solve per grid point, scaled to unit maximum.
    Vector exact_predictive_density(const Vector& x_star, const Vector& f_grid) const;

    const HybridDataset& data() const { return data_; }
    const KernelSpec& kernel() const { return kernel_; }
    const NoiseSpec& noise() const { return noise_; }
    double threshold() const { return threshold_; }
    const TiltedBase& base() const { return base_; }
    const EPResult& ep() const { return ep_; }
    bool ep_converged() const { return ep_.converged; }
    int n_data() const { return data_.n_total(); }

    // Internals used by the acquisition machinery (sampled-path predictions):
    // with pseudo-observation precisions D and targets h assembled from the
    // Gaussian likelihood and the EP sites, predictions take the standard GP
    // form mu(x) = k_x . w and cov(x, x') = k(x, x') - k_x^T Q k_x'.
    const Vector& mean_weights() const { return mean_weights_; }
    const Matrix& reduction() const { return reduction_; }
    Vector kernel_vector(const Vector& x) const;

private:
    KernelSpec kernel_;
    NoiseSpec noise_;
    HybridDataset data_;
    double threshold_ = kNoThreshold;
    TiltedBase base_;
    EPResult ep_;
    EPConfig ep_config_;

    Vector mean_weights_;  // (I + D K)^-1 h
    Matrix reduction_;     // Q = (I + D K)^-1 D, symmetric PSD
    Vector noise_vec_;     // per-stable-point noise after coincidence relaxation
};

// Line search for the threshold maximizing log F(c): a 50-point grid over
// [lo, hi] followed by golden-section refinement, one EP solve per call.
double estimate_threshold_ml(const HybridDataset& data, const KernelSpec& kernel,
                             const NoiseSpec& noise, double lo, double hi,
                             const EPConfig& ep = {});

// MAP variant: log F(c) - (c - mean)^2 / (2 std^2) over the prior's +-3 sigma
// range, clipped from below by the largest stable observation.
double estimate_threshold_map(const HybridDataset& data, const KernelSpec& kernel,
                              const NoiseSpec& noise, const ThresholdPrior& prior,
                              const EPConfig& ep = {});

// Per-stable-point noise with the near-coincidence relaxation: a stable point
// closer than 1e-3 (lengthscale-scaled) to an unstable one gets its noise
// inflated by 10.
Vector relaxed_noise(const HybridDataset& data, const KernelSpec& kernel, const NoiseSpec& noise);

std::vector<SiteDirection> dataset_directions(const HybridDataset& data);

}  // namespace gpcrbo
