#include "oracles.hpp"

#include <Eigen/Dense>

namespace oracles {

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double m, double b, double fa,
                double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    return adaptive(f, a, m, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, depth);
}

ScalarMoments truncated_moments_quadrature(double mu, double var, double bound, bool upper) {
    const double sigma = std::sqrt(var);
    const double beta = (bound - mu) / sigma;
    // Standardized window; fixed panels keep the adaptive rule from stepping
    // over the Gaussian hump when the window is wide.
    const double lo = upper ? -40.0 : std::max(beta, -40.0);
    const double hi = upper ? std::min(beta, 40.0) : 40.0;
    if (!(hi > lo)) return ScalarMoments{0.0, bound, 0.0};

    // Rescale by the density peak inside the window so tail cases keep full
    // relative precision.
    const double z_peak = lo > 0.0 ? lo : (hi < 0.0 ? hi : 0.0);
    const auto density = [z_peak](double z) {
        return std::exp(-0.5 * (z * z - z_peak * z_peak));
    };
    const auto panelled = [&](const std::function<double(double)>& f) {
        constexpr int kPanels = 64;
        double total = 0.0;
        for (int p = 0; p < kPanels; ++p) {
            const double a = lo + (hi - lo) * p / kPanels;
            const double b = lo + (hi - lo) * (p + 1) / kPanels;
            total += integrate(f, a, b, 1e-15);
        }
        return total;
    };
    const double mass_scaled = panelled(density);
    const double first = panelled([&](double z) { return z * density(z); });
    const double z_mean = first / mass_scaled;
    const double second =
        panelled([&](double z) { return (z - z_mean) * (z - z_mean) * density(z); });
    const double mass =
        mass_scaled * std::exp(-0.5 * z_peak * z_peak) / std::sqrt(2.0 * M_PI);
    return ScalarMoments{mass, mu + sigma * z_mean, var * second / mass_scaled};
}

SampleStats rejection_sample(const gpcrbo::TiltedBase& base,
                             const std::vector<gpcrbo::SiteDirection>& directions,
                             double threshold, long target_accepted, long max_draws,
                             gpcrbo::Rng& rng) {
    const Eigen::Index n = base.dim();
    const Eigen::LLT<Matrix> llt(base.covariance +
                                 1e-12 * Matrix::Identity(n, n));
    const Matrix chol = llt.matrixL();

    Vector sum = Vector::Zero(n);
    Vector sum_sq = Vector::Zero(n);
    long accepted = 0;
    long draws = 0;
    Vector z(n);
    while (accepted < target_accepted && draws < max_draws) {
        ++draws;
        for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
        const Vector f = base.mean + chol * z;
        bool inside = true;
        for (Eigen::Index i = 0; i < n && inside; ++i) {
            if (directions[static_cast<std::size_t>(i)] == gpcrbo::SiteDirection::Stable) {
                inside = f[i] <= threshold;
            } else {
                inside = f[i] >= threshold;
            }
        }
        if (inside) {
            ++accepted;
            sum += f;
            sum_sq += f.cwiseProduct(f);
        }
    }
    SampleStats stats;
    stats.accepted = accepted;
    stats.log_mass = std::log(static_cast<double>(accepted) / static_cast<double>(draws));
    stats.mean = sum / std::max<long>(accepted, 1);
    stats.std_dev =
        ((sum_sq / std::max<long>(accepted, 1)) - stats.mean.cwiseProduct(stats.mean))
            .cwiseMax(0.0)
            .cwiseSqrt();
    return stats;
}

GpPrediction gp_regression(const gpcrbo::KernelSpec& kernel, double noise_std, const Matrix& x,
                           const Vector& y, const Matrix& x_test) {
    const Matrix k = gpcrbo::kernel_matrix(kernel, x);
    Matrix c = k;
    c.diagonal().array() += noise_std * noise_std;
    const Eigen::LDLT<Matrix> solver(c);
    const Vector alpha = solver.solve(y);
    GpPrediction out;
    out.mean.resize(x_test.rows());
    out.variance.resize(x_test.rows());
    for (Eigen::Index i = 0; i < x_test.rows(); ++i) {
        Vector ks(x.rows());
        for (Eigen::Index j = 0; j < x.rows(); ++j) {
            ks[j] = gpcrbo::kernel_value(kernel, x_test.row(i), x.row(j));
        }
        out.mean[i] = ks.dot(alpha);
        out.variance[i] = kernel.variance - ks.dot(solver.solve(ks));
    }
    return out;
}

}  // namespace oracles
