#include "gpcrbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpcrbo/trunc_gauss.hpp"

namespace gpcrbo {

Matrix woodbury_extend(const Matrix& inv, const Vector& cross, double diag) {
    const Eigen::Index n = inv.rows();
    if (inv.cols() != n || cross.size() != n) {
        throw InvalidArgumentError("woodbury_extend: shape mismatch");
    }
    double schur = diag;
    Vector u;
    if (n > 0) {
        u = inv * cross;
        schur -= cross.dot(u);
    }
    if (schur < 1e-8) {
        schur += 1e-8;
        if (schur <= 0.0) {
            throw FactorizationError("woodbury_extend: non-positive Schur complement");
        }
    }
    Matrix out(n + 1, n + 1);
    if (n > 0) {
        out.topLeftCorner(n, n) = inv + (u * u.transpose()) / schur;
        out.topRightCorner(n, 1) = -u / schur;
        out.bottomLeftCorner(1, n) = -u.transpose() / schur;
    }
    out(n, n) = 1.0 / schur;
    return out;
}

VirtualDataset::VirtualDataset(const GpcrModel& base)
    : base_(&base),
      noise_var_(base.noise().std_dev * base.noise().std_dev),
      inverse_(0, 0) {}

void VirtualDataset::reset() {
    xs_.clear();
    ys_.clear();
    prior_means_.clear();
    kvecs_.clear();
    reduced_.clear();
    inverse_.resize(0, 0);
}

double VirtualDataset::posterior_mean(const Vector& x) const {
    double mean, variance;
    base_->predict_one(x, mean, variance);
    return mean;
}

double VirtualDataset::posterior_var(const Vector& x) const {
    double mean, variance;
    base_->predict_one(x, mean, variance);
    return variance;
}

double VirtualDataset::posterior_cov(const Vector& x, int j) const {
    if (base_->n_data() == 0) {
        return kernel_value(base_->kernel(), x, xs_[j]);
    }
    const Vector k = base_->kernel_vector(x);
    return kernel_value(base_->kernel(), x, xs_[j]) - k.dot(reduced_[j]);
}

double VirtualDataset::evaluate(const Vector& x, Rng& rng) {
    const int r = size();
    const double prior_mean = posterior_mean(x);
    const double prior_var = posterior_var(x);
    Vector cross(r);
    for (int j = 0; j < r; ++j) {
        cross[j] = posterior_cov(x, j);
    }

    double mean = prior_mean;
    double variance = prior_var;
    if (r > 0) {
        Vector centered(r);
        for (int j = 0; j < r; ++j) {
            centered[j] = ys_[j] - prior_means_[j];
        }
        const Vector w = inverse_ * cross;
        mean += w.dot(centered);
        variance -= w.dot(cross);
    }
    variance = std::max(variance, 0.0);

    const double f = mean + std::sqrt(variance) * rng.normal();
    const double y = f + std::sqrt(noise_var_) * rng.normal();

    Matrix extended;
    try {
        extended = woodbury_extend(inverse_, cross, prior_var + noise_var_);
    } catch (const FactorizationError&) {
        extended = woodbury_extend(inverse_, cross, prior_var + 100.0 * noise_var_);
    }
    inverse_ = std::move(extended);
    xs_.push_back(x);
    ys_.push_back(y);
    prior_means_.push_back(prior_mean);
    if (base_->n_data() > 0) {
        const Vector k = base_->kernel_vector(x);
        kvecs_.push_back(k);
        reduced_.push_back(base_->reduction() * k);
    } else {
        kvecs_.emplace_back();
        reduced_.emplace_back();
    }
    return y;
}

double VirtualDataset::min_value() const {
    return ys_.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : *std::min_element(ys_.begin(), ys_.end());
}

Matrix VirtualDataset::dense_covariance() const {
    const int r = size();
    Matrix cov(r, r);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            if (base_->n_data() == 0) {
                cov(i, j) = kernel_value(base_->kernel(), xs_[i], xs_[j]);
            } else {
                cov(i, j) = kernel_value(base_->kernel(), xs_[i], xs_[j]) -
                            kvecs_[i].dot(reduced_[j]);
            }
        }
        cov(i, i) += noise_var_;
    }
    return cov;
}

double alpha_mes(double mu, double sigma, const MinValueSamples& samples) {
    if (samples.values.empty()) {
        throw InvalidArgumentError("alpha_mes needs at least one min-value sample");
    }
    double sum = 0.0;
    for (double f_min : samples.values) {
        const double z = (f_min - mu) / sigma;
        const double log_phi_neg = norm_log_cdf(-z);
        const double hazard = std::exp(norm_log_pdf(z) - log_phi_neg);
        sum += -0.5 * z * hazard - log_phi_neg;
    }
    return sum / static_cast<double>(samples.values.size());
}

namespace {

struct ProbeResult {
    double value = 0.0;
    bool feasible = true;
    double violation = 0.0;
};

}  // namespace

MinValueSamples sample_constrained_min(const GpcrModel& objective,
                                       const std::vector<const GpcrModel*>& constraints,
                                       const AcquisitionConfig& config, Rng& rng,
                                       double incumbent_value) {
    const int dim = objective.kernel().dim();
    const double cap = incumbent_value - 2.0 * objective.noise().std_dev;
    MinValueSamples out;
    out.values.reserve(config.n_samples);

    for (int s = 0; s < config.n_samples; ++s) {
        VirtualDataset vd_objective(objective);
        std::vector<VirtualDataset> vd_constraints;
        vd_constraints.reserve(constraints.size());
        for (const GpcrModel* c : constraints) {
            vd_constraints.emplace_back(*c);
        }

        int evals = 0;
        double best_feasible = std::numeric_limits<double>::infinity();
        const auto probe = [&](const Vector& x) {
            ProbeResult res;
            res.value = vd_objective.evaluate(x, rng);
            ++evals;
            for (std::size_t j = 0; j < constraints.size(); ++j) {
                const double g = vd_constraints[j].evaluate(x, rng);
                const double c = constraints[j]->threshold();
                if (g > c) {
                    res.feasible = false;
                    res.violation += g - c;
                }
            }
            if (res.feasible) best_feasible = std::min(best_feasible, res.value);
            return res;
        };

        Vector x(dim);
        for (int d = 0; d < dim; ++d) {
            x[d] = rng.uniform();
        }
        ProbeResult current = probe(x);

        double step = 0.25;
        while (evals < config.max_virtual_evals && step >= config.restart_tolerance) {
            bool improved = false;
            for (int d = 0; d < dim && evals < config.max_virtual_evals; ++d) {
                for (int sign : {+1, -1}) {
                    if (evals >= config.max_virtual_evals) break;
                    Vector xt = x;
                    xt[d] = std::clamp(xt[d] + sign * step, 0.0, 1.0);
                    if (xt[d] == x[d]) continue;
                    const ProbeResult probed = probe(xt);
                    const bool better =
                        (probed.feasible && !current.feasible) ||
                        (probed.feasible && current.feasible && probed.value < current.value) ||
                        (!probed.feasible && !current.feasible &&
                         probed.violation < current.violation);
                    if (better) {
                        x = xt;
                        current = probed;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }

        double sample = std::isfinite(best_feasible)
                            ? best_feasible
                            // No feasible draw anywhere: fall back to the lowest
                            // objective draw seen during this restart.
                            : vd_objective.min_value();
        out.values.push_back(std::min(sample, cap));
    }
    return out;
}

Matrix candidate_grid(int n, int dim, Rng& rng) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    if (dim > static_cast<int>(std::size(primes))) {
        throw InvalidArgumentError("candidate_grid supports at most 10 dimensions");
    }
    Vector shift(dim);
    for (int d = 0; d < dim; ++d) {
        shift[d] = rng.uniform();
    }
    Matrix grid(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < dim; ++d) {
            // radical inverse of (i+1) in the d-th prime base
            double inv_base = 1.0 / primes[d];
            double scale = inv_base;
            double value = 0.0;
            int k = i + 1;
            while (k > 0) {
                value += (k % primes[d]) * scale;
                k /= primes[d];
                scale *= inv_base;
            }
            value += shift[d];
            grid(i, d) = value - std::floor(value);
        }
    }
    return grid;
}

double constraint_probability(const Vector& x, const std::vector<const GpcrModel*>& constraints) {
    double prob = 1.0;
    for (const GpcrModel* c : constraints) {
        prob *= c->prob_stable(x);
    }
    return prob;
}

MescoMode determine_mode(const Matrix& grid, const std::vector<const GpcrModel*>& constraints,
                         double delta) {
    if (constraints.empty()) return MescoMode::Weighted;
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        if (constraint_probability(grid.row(i), constraints) >= 1.0 - delta) {
            return MescoMode::Weighted;
        }
    }
    return MescoMode::ProbabilityOnly;
}

double alpha_mesco(const Vector& x, const GpcrModel& objective,
                   const std::vector<const GpcrModel*>& constraints,
                   const MinValueSamples& samples, MescoMode mode) {
    const double prob = constraint_probability(x, constraints);
    if (mode == MescoMode::ProbabilityOnly) {
        return prob;
    }
    double mean, variance;
    objective.predict_one(x, mean, variance);
    const double sigma = std::max(std::sqrt(variance), 1e-9);
    return alpha_mes(mean, sigma, samples) * prob;
}

MaximizeResult maximize_acquisition(const std::function<double(const Vector&)>& surface,
                                    const Matrix& grid, const AcquisitionConfig& config) {
    const Eigen::Index n = grid.rows();
    const int dim = static_cast<int>(grid.cols());
    if (n == 0) {
        throw InvalidArgumentError("maximize_acquisition needs a non-empty grid");
    }
    Vector values(n);
    Eigen::Index best = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        values[i] = surface(grid.row(i));
        if (values[i] > values[best]) best = i;
    }

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    const int starts = std::min<int>(config.n_restarts, static_cast<int>(n));
    std::partial_sort(order.begin(), order.begin() + starts, order.end(),
                      [&values](Eigen::Index a, Eigen::Index b) {
                          if (values[a] != values[b]) return values[a] > values[b];
                          return a < b;
                      });

    Vector best_x = grid.row(best);
    double best_value = values[best];
    for (int s = 0; s < starts; ++s) {
        Vector x = grid.row(order[s]);
        double value = values[order[s]];
        double step = 0.05;
        for (int iter = 0; iter < 50; ++iter) {
            bool improved = false;
            for (int d = 0; d < dim; ++d) {
                for (int sign : {+1, -1}) {
                    Vector xt = x;
                    xt[d] = std::clamp(xt[d] + sign * step, 0.0, 1.0);
                    if (xt[d] == x[d]) continue;
                    const double vt = surface(xt);
                    if (vt > value) {
                        x = xt;
                        value = vt;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (value > best_value) {
            best_value = value;
            best_x = x;
        }
    }
    return MaximizeResult{best_x, best_value};
}

}  // namespace gpcrbo
