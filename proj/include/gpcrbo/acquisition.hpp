#pragma once

#include <functional>
#include <vector>

#include "gpcrbo/model.hpp"
#include "gpcrbo/rng.hpp"

namespace gpcrbo {

struct MinValueSamples {
    std::vector<double> values;  // S draws of the constrained minimum
};

struct AcquisitionConfig {
    int n_samples = 10;              // S
    double delta = 0.05;             // confidence level 1 - delta
    int max_virtual_evals = 200;     // R, per min-value sample
    double restart_tolerance = 1e-3; // kappa: local search step floor
    int n_restarts = 5;              // refinement starts in maximize_acquisition
    int candidate_grid = 2000;       // quasi-random candidates per iteration
};

// Extend the inverse of an n x n covariance by one row/column using the
// block-inverse identity; O(n^2). `cross` holds the covariances to the
// existing points and `diag` the new diagonal entry.
Matrix woodbury_extend(const Matrix& inv, const Vector& cross, double diag);

// Scratch dataset of virtual evaluations on top of a fitted model.
// Successive draws condition on the earlier ones, so a sequence of calls
// behaves like queries to a single function sampled from the posterior.
// Single-owner mutable state; never share one instance across samplers.
class VirtualDataset {
public:
    explicit VirtualDataset(const GpcrModel& base);

    // Sample the latent value at x given base data plus prior virtual
    // points, add observation noise, append, and update the inverse.
    double evaluate(const Vector& x, Rng& rng);

    void reset();
    int size() const { return static_cast<int>(ys_.size()); }
    double min_value() const;

    const Matrix& inverse() const { return inverse_; }
    // Rebuilt dense covariance of the virtual points (for verification).
    Matrix dense_covariance() const;

private:
    double posterior_mean(const Vector& x) const;
    double posterior_cov(const Vector& x, int j) const;  // against virtual point j
    double posterior_var(const Vector& x) const;

    const GpcrModel* base_;
    double noise_var_;
    std::vector<Vector> xs_;
    std::vector<double> ys_;
    std::vector<double> prior_means_;
    std::vector<Vector> kvecs_;      // kernel vector of each virtual point
    std::vector<Vector> reduced_;    // model reduction Q * k
    Matrix inverse_;                 // inverse of the expanded covariance
};

// One summand of the min-value entropy acquisition, assembled through
// norm_log_cdf so both tails stay finite.
double alpha_mes(double mu, double sigma, const MinValueSamples& samples);

// Draw S samples of the constrained minimum by local optimization over
// virtual evaluations (fresh virtual datasets per sample). Each sample is the
// lowest feasible draw its trajectory saw, clamped from above at the best
// feasible observed value minus two noise widths: the constrained minimum
// cannot exceed a value the data has already seen, and samples at or above
// it put spurious acquisition peaks on re-evaluated points.
MinValueSamples sample_constrained_min(
    const GpcrModel& objective, const std::vector<const GpcrModel*>& constraints,
    const AcquisitionConfig& config, Rng& rng,
    double incumbent_value = std::numeric_limits<double>::infinity());

enum class MescoMode {
    Weighted,         // alpha_mes(x) * prod_j P(g_j(x) <= c_j)
    ProbabilityOnly,  // prod_j P(g_j(x) <= c_j)
};

// Candidate grid: Cranley-Patterson rotated Halton points in [0,1)^dim.
Matrix candidate_grid(int n, int dim, Rng& rng);

// Mode (a) applies when some candidate satisfies all constraints with
// probability >= 1 - delta; otherwise mode (b).
MescoMode determine_mode(const Matrix& grid, const std::vector<const GpcrModel*>& constraints,
                         double delta);

double constraint_probability(const Vector& x, const std::vector<const GpcrModel*>& constraints);

double alpha_mesco(const Vector& x, const GpcrModel& objective,
                   const std::vector<const GpcrModel*>& constraints,
                   const MinValueSamples& samples, MescoMode mode);

struct MaximizeResult {
    Vector x;
    double value;
};

// Evaluate the surface on the candidate grid, then run a coordinate pattern
// search (50 steps, shrink 0.5) from the best n_restarts points. Ties on the
// grid break toward the lowest index.
MaximizeResult maximize_acquisition(const std::function<double(const Vector&)>& surface,
                                    const Matrix& grid, const AcquisitionConfig& config);

}  // namespace gpcrbo
