#pragma once

#include <Eigen/Dense>

#include "gpcrbo/errors.hpp"

namespace gpcrbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Stationary covariance function. Isometric = all lengthscales equal.
struct KernelSpec {
    enum class Family { Matern32 };

    double variance = 1.0;   // signal variance
    Vector lengthscales;     // one per input dimension, all > 0
    Family family = Family::Matern32;

    static KernelSpec isometric(double variance, double lengthscale, int dim);

    int dim() const { return static_cast<int>(lengthscales.size()); }
    void validate() const;  // throws InvalidArgumentError
};

struct NoiseSpec {
    double std_dev = 0.0;  // observation noise, >= 0
};

// Matern 3/2 covariance between two points.
double matern32(const KernelSpec& spec, const Vector& x, const Vector& x2);

// Kernel value dispatched on spec.family (only Matern32 today).
double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& x2);

// Gram matrix of the points given as rows of X.
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X);

// Cross-covariance matrix between row sets A (n x d) and B (m x d).
Matrix kernel_cross(const KernelSpec& spec, const Matrix& A, const Matrix& B);

struct CholeskyResult {
    Matrix factor;  // lower triangular L with L L^T = M + jitter I
    double jitter;
};

// Cholesky factorization with geometric jitter escalation: starts at 1e-10,
// multiplies by 10 up to 1e-4, then throws FactorizationError.
CholeskyResult cholesky_with_jitter(const Matrix& m);

}  // namespace gpcrbo
