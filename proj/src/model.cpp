#include "gpcrbo/model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "gpcrbo/trunc_gauss.hpp"

namespace gpcrbo {

void HybridDataset::add_stable(const Vector& x, double y) {
    if (x.size() != dim) {
        throw InvalidArgumentError("dataset: point dimension mismatch");
    }
    stable_x.conservativeResize(stable_x.rows() + 1, dim);
    stable_x.row(stable_x.rows() - 1) = x.transpose();
    stable_y.conservativeResize(stable_y.size() + 1);
    stable_y[stable_y.size() - 1] = y;
}

void HybridDataset::add_unstable(const Vector& x) {
    if (x.size() != dim) {
        throw InvalidArgumentError("dataset: point dimension mismatch");
    }
    unstable_x.conservativeResize(unstable_x.rows() + 1, dim);
    unstable_x.row(unstable_x.rows() - 1) = x.transpose();
}

Matrix HybridDataset::all_x() const {
    Matrix x(n_total(), dim);
    if (n_stable() > 0) x.topRows(n_stable()) = stable_x;
    if (n_unstable() > 0) x.bottomRows(n_unstable()) = unstable_x;
    return x;
}

void HybridDataset::validate() const {
    if (dim <= 0) {
        throw InvalidArgumentError("dataset: dimension must be positive");
    }
    if (stable_x.rows() != stable_y.size()) {
        throw InvalidArgumentError("dataset: |stable_x| must equal |stable_y|");
    }
    if ((stable_x.rows() > 0 && stable_x.cols() != dim) ||
        (unstable_x.rows() > 0 && unstable_x.cols() != dim)) {
        throw InvalidArgumentError("dataset: point dimension mismatch");
    }
}

std::string dataset_to_json(const HybridDataset& data) {
    nlohmann::json j;
    j["dim"] = data.dim;
    j["stable"] = nlohmann::json::array();
    for (int i = 0; i < data.n_stable(); ++i) {
        nlohmann::json entry;
        entry["x"] = std::vector<double>(data.stable_x.row(i).begin(), data.stable_x.row(i).end());
        entry["y"] = data.stable_y[i];
        j["stable"].push_back(entry);
    }
    j["unstable"] = nlohmann::json::array();
    for (int i = 0; i < data.n_unstable(); ++i) {
        nlohmann::json entry;
        entry["x"] =
            std::vector<double>(data.unstable_x.row(i).begin(), data.unstable_x.row(i).end());
        j["unstable"].push_back(entry);
    }
    return j.dump();
}

HybridDataset dataset_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgumentError(std::string("dataset JSON parse error: ") + e.what());
    }
    try {
        HybridDataset data(j.at("dim").get<int>());
        for (const auto& entry : j.at("stable")) {
            const auto xs = entry.at("x").get<std::vector<double>>();
            data.add_stable(Eigen::Map<const Vector>(xs.data(), xs.size()),
                            entry.at("y").get<double>());
        }
        for (const auto& entry : j.at("unstable")) {
            const auto xs = entry.at("x").get<std::vector<double>>();
            data.add_unstable(Eigen::Map<const Vector>(xs.data(), xs.size()));
        }
        data.validate();
        return data;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgumentError(std::string("dataset JSON is malformed: ") + e.what());
    }
}

Vector relaxed_noise(const HybridDataset& data, const KernelSpec& kernel, const NoiseSpec& noise) {
    Vector out = Vector::Constant(data.n_stable(), noise.std_dev);
    for (int i = 0; i < data.n_stable(); ++i) {
        for (int j = 0; j < data.n_unstable(); ++j) {
            const Vector d =
                (data.stable_x.row(i) - data.unstable_x.row(j)).transpose().cwiseQuotient(
                    kernel.lengthscales);
            if (d.norm() < 1e-3) {
                out[i] = noise.std_dev * 10.0;
                break;
            }
        }
    }
    return out;
}

std::vector<SiteDirection> dataset_directions(const HybridDataset& data) {
    std::vector<SiteDirection> dirs(data.n_total(), SiteDirection::Stable);
    std::fill(dirs.begin() + data.n_stable(), dirs.end(), SiteDirection::Unstable);
    return dirs;
}

GpcrModel GpcrModel::fit(const HybridDataset& data, const KernelSpec& kernel,
                         const NoiseSpec& noise, double threshold, const EPConfig& ep) {
    data.validate();
    kernel.validate();
    if (kernel.dim() != data.dim) {
        throw InvalidArgumentError("fit: kernel dimension must match the dataset");
    }
    if (noise.std_dev < 0.0) {
        throw InvalidArgumentError("fit: noise std must be non-negative");
    }
    if (std::isinf(threshold) && data.n_unstable() > 0) {
        throw InvalidArgumentError("fit: the no-truncation sentinel needs an all-stable dataset");
    }
    if (std::isnan(threshold)) {
        throw InvalidArgumentError("fit: threshold must not be NaN");
    }

    GpcrModel model;
    model.kernel_ = kernel;
    model.noise_ = noise;
    model.data_ = data;
    model.threshold_ = threshold;
    model.ep_config_ = ep;

    const int n = data.n_total();
    if (n == 0) {
        model.base_ = TiltedBase{Vector(), Matrix(), 0.0};
        model.ep_ = EPResult{Vector(), Matrix(), 0.0, true, 0, 0, Vector(), Vector()};
        return model;
    }

    const Matrix prior = kernel_matrix(kernel, data.all_x());
    model.noise_vec_ = relaxed_noise(data, kernel, noise);
    model.base_ = tilted_base(prior, data.stable_y, model.noise_vec_);
    if (std::isinf(threshold)) {
        model.ep_ = EPResult{model.base_.mean,     model.base_.covariance,
                             model.base_.log_norm, true,
                             0,                    0,
                             Vector::Zero(n),      Vector::Zero(n)};
    } else {
        model.ep_ = ep_box_posterior(model.base_, dataset_directions(data), threshold, ep);
    }

    // Pseudo-observation form of the predictive: every point carries the
    // combined precision of its Gaussian likelihood (stable points) and its
    // EP site, so mu_* = k_*^T (I + D K)^-1 h and the covariance reduction is
    // Q = (I + D K)^-1 D. Equivalent to marginalizing p(f_* | f) against the
    // EP posterior, without ever forming K^-1.
    Vector precisions = model.ep_.site_tau;
    Vector targets = model.ep_.site_nu;
    for (int i = 0; i < data.n_stable(); ++i) {
        const double noise_var =
            std::max(model.noise_vec_[i] * model.noise_vec_[i], 1e-12);
        precisions[i] += 1.0 / noise_var;
        targets[i] += data.stable_y[i] / noise_var;
    }
    Matrix system = prior;
    for (int i = 0; i < n; ++i) {
        system.row(i) *= precisions[i];
        system(i, i) += 1.0;
    }
    const Eigen::PartialPivLU<Matrix> lu(system);
    model.mean_weights_ = lu.solve(targets);
    model.reduction_ = lu.solve(Matrix(precisions.asDiagonal()));
    model.reduction_ = 0.5 * (model.reduction_ + model.reduction_.transpose()).eval();
    return model;
}

Vector GpcrModel::kernel_vector(const Vector& x) const {
    const Matrix all = data_.all_x();
    Vector k(all.rows());
    for (Eigen::Index i = 0; i < all.rows(); ++i) {
        k[i] = kernel_value(kernel_, x, all.row(i));
    }
    return k;
}

void GpcrModel::predict_one(const Vector& x, double& mean, double& variance) const {
    if (x.size() != kernel_.dim() && data_.n_total() > 0) {
        throw InvalidArgumentError("predict: point dimension mismatch");
    }
    if (data_.n_total() == 0) {
        mean = 0.0;
        variance = kernel_.variance > 0 ? kernel_.variance : 1.0;
        return;
    }
    const Vector k = kernel_vector(x);
    mean = k.dot(mean_weights_);
    variance = kernel_.variance - k.dot(reduction_ * k);
    variance = std::max(variance, 0.0);
}

PredictiveMoments GpcrModel::predict(const Matrix& x_test) const {
    PredictiveMoments out;
    out.mean.resize(x_test.rows());
    out.variance.resize(x_test.rows());
    for (Eigen::Index i = 0; i < x_test.rows(); ++i) {
        double m, v;
        predict_one(x_test.row(i), m, v);
        out.mean[i] = m;
        out.variance[i] = v;
    }
    return out;
}

double GpcrModel::prob_stable(const Vector& x) const {
    if (std::isinf(threshold_)) return 1.0;
    double mean, variance;
    predict_one(x, mean, variance);
    const double sigma = std::sqrt(variance);
    if (sigma == 0.0) {
        return threshold_ >= mean ? 1.0 : 0.0;
    }
    return norm_cdf((threshold_ - mean) / sigma);
}

Vector GpcrModel::exact_predictive_density(const Vector& x_star, const Vector& f_grid) const {
    const int n = data_.n_total();
    Vector log_density(f_grid.size());
    if (n == 0) {
        for (Eigen::Index g = 0; g < f_grid.size(); ++g) {
            log_density[g] = -0.5 * f_grid[g] * f_grid[g] / kernel_.variance;
        }
    } else {
        Matrix extended(n + 1, data_.dim);
        extended.topRows(n) = data_.all_x();
        extended.row(n) = x_star.transpose();
        const Matrix prior = kernel_matrix(kernel_, extended);
        const TiltedBase joint = tilted_base(prior, data_.stable_y, noise_vec_);

        const Vector mean_f = joint.mean.head(n);
        const double mean_star = joint.mean[n];
        const Vector cross = joint.covariance.topRightCorner(n, 1);
        const double var_star = std::max(joint.covariance(n, n), 1e-12);
        Matrix cond_cov =
            joint.covariance.topLeftCorner(n, n) - (cross * cross.transpose()) / var_star;
        cond_cov = 0.5 * (cond_cov + cond_cov.transpose()).eval();

        const auto dirs = dataset_directions(data_);
        for (Eigen::Index g = 0; g < f_grid.size(); ++g) {
            const double f = f_grid[g];
            const double gauss =
                -0.5 * std::log(2.0 * M_PI * var_star) - 0.5 * (f - mean_star) * (f - mean_star) / var_star;
            double box = 0.0;
            if (!std::isinf(threshold_)) {
                TiltedBase cond;
                cond.mean = mean_f + cross * ((f - mean_star) / var_star);
                cond.covariance = cond_cov;
                cond.log_norm = 0.0;
                box = log_mass_at(cond, dirs, threshold_, ep_config_);
            }
            log_density[g] = gauss + box;
        }
    }
    const double peak = log_density.maxCoeff();
    return (log_density.array() - peak).exp();
}

namespace {

// Maximize a scalar function: 50-point grid scan, then golden-section
// refinement around the best grid point.
template <typename F>
double grid_golden_max(F&& objective, double lo, double hi) {
    constexpr int kGridPoints = 50;
    if (!(hi > lo)) return lo;
    double best_value = -std::numeric_limits<double>::infinity();
    int best_index = 0;
    std::vector<double> grid(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (kGridPoints - 1);
        const double v = objective(grid[i]);
        if (v > best_value) {
            best_value = v;
            best_index = i;
        }
    }
    double a = grid[std::max(best_index - 1, 0)];
    double b = grid[std::min(best_index + 1, kGridPoints - 1)];
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - golden * (b - a);
    double x2 = a + golden * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    const double tol = std::max(1e-6, 1e-4 * (hi - lo));
    int iters = 0;
    while (b - a > tol && iters++ < 60) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = objective(x2);
        }
    }
    const double mid = 0.5 * (a + b);
    return objective(mid) >= best_value ? mid : grid[best_index];
}

struct ThresholdScan {
    TiltedBase base;
    std::vector<SiteDirection> directions;
};

ThresholdScan prepare_scan(const HybridDataset& data, const KernelSpec& kernel,
                           const NoiseSpec& noise) {
    const Matrix prior = kernel_matrix(kernel, data.all_x());
    return ThresholdScan{tilted_base(prior, data.stable_y, relaxed_noise(data, kernel, noise)),
                         dataset_directions(data)};
}

}  // namespace

double estimate_threshold_ml(const HybridDataset& data, const KernelSpec& kernel,
                             const NoiseSpec& noise, double lo, double hi, const EPConfig& ep) {
    data.validate();
    if (data.n_stable() == 0) return 0.0;
    if (data.n_unstable() == 0) return hi;
    const double lo_eff = std::max(lo, data.stable_y.maxCoeff());
    const double hi_eff = std::max(hi, lo_eff + 1e-6);
    const ThresholdScan scan = prepare_scan(data, kernel, noise);
    return grid_golden_max(
        [&](double c) { return log_mass_at(scan.base, scan.directions, c, ep); }, lo_eff, hi_eff);
}

double estimate_threshold_map(const HybridDataset& data, const KernelSpec& kernel,
                              const NoiseSpec& noise, const ThresholdPrior& prior,
                              const EPConfig& ep) {
    data.validate();
    if (!(prior.std_dev > 0.0)) {
        throw InvalidArgumentError("threshold prior std must be positive");
    }
    if (data.n_stable() == 0) return 0.0;
    double lo = prior.mean - 3.0 * prior.std_dev;
    double hi = prior.mean + 3.0 * prior.std_dev;
    lo = std::max(lo, data.stable_y.maxCoeff());
    hi = std::max(hi, lo + 1e-3 * prior.std_dev);
    const ThresholdScan scan = prepare_scan(data, kernel, noise);
    return grid_golden_max(
        [&](double c) {
            const double penalty = (c - prior.mean) / prior.std_dev;
            return log_mass_at(scan.base, scan.directions, c, ep) - 0.5 * penalty * penalty;
        },
        lo, hi);
}

}  // namespace gpcrbo
