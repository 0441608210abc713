#include "gpcrbo/ep.hpp"

#include <cmath>

#include "gpcrbo/trunc_gauss.hpp"

namespace gpcrbo {

TiltedBase tilted_base(const Matrix& prior, const Vector& stable_y, const Vector& noise_std) {
    const Eigen::Index n = prior.rows();
    const Eigen::Index ns = stable_y.size();
    if (prior.cols() != n) {
        throw InvalidArgumentError("tilted_base: prior must be square");
    }
    if (ns > n) {
        throw InvalidArgumentError("tilted_base: more observations than prior dimensions");
    }
    if (noise_std.size() != ns) {
        throw InvalidArgumentError("tilted_base: one noise entry per stable observation");
    }
    if (ns == 0) {
        return TiltedBase{Vector::Zero(n), prior, 0.0};
    }

    // Observation covariance C = K_ss + diag(noise^2); the Gaussian-product
    // constant is the marginal likelihood N(y | 0, C).
    Matrix obs_cov = prior.topLeftCorner(ns, ns);
    obs_cov.diagonal() += noise_std.array().square().matrix();
    const CholeskyResult chol = cholesky_with_jitter(obs_cov);
    const auto solve = [&chol](const Matrix& rhs) {
        Matrix out = chol.factor.triangularView<Eigen::Lower>().solve(rhs);
        chol.factor.transpose().triangularView<Eigen::Upper>().solveInPlace(out);
        return out;
    };

    const Matrix k_left = prior.leftCols(ns);  // n x ns
    const Vector alpha = solve(stable_y);
    TiltedBase base;
    base.mean = k_left * alpha;
    base.covariance = prior - k_left * solve(k_left.transpose());
    base.covariance = 0.5 * (base.covariance + base.covariance.transpose()).eval();

    const double log_det = 2.0 * chol.factor.diagonal().array().log().sum();
    base.log_norm = -0.5 * (static_cast<double>(ns) * std::log(2.0 * M_PI) + log_det +
                            stable_y.dot(alpha));
    return base;
}

TiltedBase tilted_base(const Matrix& prior, const Vector& stable_y, const NoiseSpec& noise,
                       int n_stable) {
    if (stable_y.size() != n_stable) {
        throw InvalidArgumentError("tilted_base: |stable_y| must equal n_stable");
    }
    return tilted_base(prior, stable_y, Vector::Constant(n_stable, noise.std_dev));
}

namespace {

// Scalar Gaussian-site state in natural parameters: exp(nu*f - tau*f^2/2).
struct Sites {
    Vector tau;
    Vector nu;
};

}  // namespace

EPResult ep_box_posterior(const TiltedBase& base, const std::vector<SiteDirection>& directions,
                          double threshold, const EPConfig& config) {
    const Eigen::Index n = base.dim();
    if (static_cast<Eigen::Index>(directions.size()) != n) {
        throw InvalidArgumentError("ep_box_posterior: one direction per base dimension");
    }
    if (n == 0) {
        return EPResult{base.mean, base.covariance, base.log_norm, true, 0, 0, Vector(), Vector()};
    }

    // Work against the jittered base so precision and covariance agree.
    const CholeskyResult bc = cholesky_with_jitter(base.covariance);
    const Matrix base_cov = bc.factor * bc.factor.transpose();
    Matrix base_prec = Matrix::Identity(n, n);
    bc.factor.triangularView<Eigen::Lower>().solveInPlace(base_prec);
    bc.factor.transpose().triangularView<Eigen::Upper>().solveInPlace(base_prec);
    base_prec = 0.5 * (base_prec + base_prec.transpose()).eval();
    const Vector base_h = base_prec * base.mean;
    const double base_log_det = 2.0 * bc.factor.diagonal().array().log().sum();

    Sites sites{Vector::Zero(n), Vector::Zero(n)};
    Matrix cov = base_cov;
    Vector mean = base.mean;

    EPResult result;
    result.converged = false;
    result.skipped_updates = 0;

    const auto side_of = [](SiteDirection d) {
        return d == SiteDirection::Stable ? TruncSide::Upper : TruncSide::Lower;
    };

    int sweep = 0;
    for (; sweep < config.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sii = cov(i, i);
            if (!(sii > 0.0)) {
                ++result.skipped_updates;
                continue;
            }
            const double tau_cav = 1.0 / sii - sites.tau[i];
            if (!(tau_cav > 0.0) || 1.0 / tau_cav < config.min_cavity_variance) {
                ++result.skipped_updates;
                continue;
            }
            const double cav_var = 1.0 / tau_cav;
            const double cav_mean = (mean[i] / sii - sites.nu[i]) * cav_var;

            const TruncatedMoments tm =
                truncated_moments(cav_mean, cav_var, threshold, side_of(directions[i]));
            // A step factor only ever shrinks the variance; the floor keeps
            // the matched precision finite when the cavity sits deep in a tail.
            const double matched_var = std::max(tm.variance, 1e-12 * cav_var);
            const double matched_prec = 1.0 / matched_var;
            const double tau_target = std::max(matched_prec - tau_cav, 0.0);
            const double nu_target = tm.mean * matched_prec - cav_mean * tau_cav;

            const double d_tau = config.damping * (tau_target - sites.tau[i]);
            const double d_nu = config.damping * (nu_target - sites.nu[i]);
            const double denom = 1.0 + d_tau * sii;
            if (!(denom > 1e-12)) {
                ++result.skipped_updates;
                continue;
            }
            sites.tau[i] += d_tau;
            sites.nu[i] += d_nu;
            max_delta = std::max({max_delta, std::abs(d_tau), std::abs(d_nu)});

            const Vector col = cov.col(i);
            cov.noalias() -= (d_tau / denom) * (col * col.transpose());
            mean.noalias() += col * ((d_nu - d_tau * mean[i]) / denom);
        }
        if (max_delta < config.tolerance) {
            result.converged = true;
            ++sweep;
            break;
        }
        // Refresh the joint from natural parameters; rank-one updates drift.
        Matrix lambda = base_prec;
        lambda.diagonal() += sites.tau;
        const CholeskyResult lc = cholesky_with_jitter(lambda);
        Matrix fresh_cov = Matrix::Identity(n, n);
        lc.factor.triangularView<Eigen::Lower>().solveInPlace(fresh_cov);
        lc.factor.transpose().triangularView<Eigen::Upper>().solveInPlace(fresh_cov);
        cov = 0.5 * (fresh_cov + fresh_cov.transpose()).eval();
        mean = cov * (base_h + sites.nu);
    }
    result.sweeps_used = sweep;

    // Final moments recomputed from natural parameters so that the mass
    // assembly below sees a consistent (Lambda, mu) pair.
    Matrix lambda = base_prec;
    lambda.diagonal() += sites.tau;
    const CholeskyResult lc = cholesky_with_jitter(lambda);
    Matrix cov_final = Matrix::Identity(n, n);
    lc.factor.triangularView<Eigen::Lower>().solveInPlace(cov_final);
    lc.factor.transpose().triangularView<Eigen::Upper>().solveInPlace(cov_final);
    result.covariance = 0.5 * (cov_final + cov_final.transpose()).eval();
    const Vector h = base_h + sites.nu;
    result.mean = result.covariance * h;

    // log Z_EP: per-site normalizers from the converged cavities plus the
    // Gaussian integral of the site product against the base.
    double site_constants = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sii = result.covariance(i, i);
        double tau_cav = 1.0 / sii - sites.tau[i];
        double nu_cav = result.mean[i] / sii - sites.nu[i];
        if (!(tau_cav > 0.0)) {
            // Degenerate cavity; fall back to the marginal itself.
            tau_cav = 1.0 / sii;
            nu_cav = result.mean[i] / sii;
        }
        const double cav_var = 1.0 / tau_cav;
        const double cav_mean = nu_cav * cav_var;
        const double log_tilted_mass =
            truncated_moments(cav_mean, cav_var, threshold, side_of(directions[i])).log_mass;
        site_constants += log_tilted_mass + 0.5 * std::log1p(sites.tau[i] / tau_cav) -
                          0.5 * (nu_cav + sites.nu[i]) * (nu_cav + sites.nu[i]) /
                              (tau_cav + sites.tau[i]) +
                          0.5 * nu_cav * nu_cav / tau_cav;
    }
    const double lambda_log_det = 2.0 * lc.factor.diagonal().array().log().sum();
    const double log_box = site_constants - 0.5 * (base_log_det + lambda_log_det) +
                           0.5 * (h.dot(result.mean) - base.mean.dot(base_h));
    result.log_mass = base.log_norm + log_box;
    result.site_tau = sites.tau;
    result.site_nu = sites.nu;
    return result;
}

double log_mass_at(const TiltedBase& base, const std::vector<SiteDirection>& directions,
                   double threshold, const EPConfig& config) {
    return ep_box_posterior(base, directions, threshold, config).log_mass;
}

}  // namespace gpcrbo
