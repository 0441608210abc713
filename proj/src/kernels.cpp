#include "gpcrbo/kernels.hpp"

#include <cmath>

namespace gpcrbo {

KernelSpec KernelSpec::isometric(double variance, double lengthscale, int dim) {
    KernelSpec spec;
    spec.variance = variance;
    spec.lengthscales = Vector::Constant(dim, lengthscale);
    spec.validate();
    return spec;
}

void KernelSpec::validate() const {
    if (!(variance > 0.0)) {
        throw InvalidArgumentError("kernel variance must be positive");
    }
    if (lengthscales.size() == 0) {
        throw InvalidArgumentError("kernel needs at least one lengthscale");
    }
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
        if (!(lengthscales[i] > 0.0)) {
            throw InvalidArgumentError("kernel lengthscales must be positive");
        }
    }
}

namespace {

double scaled_distance(const KernelSpec& spec, const Vector& x, const Vector& x2) {
    if (x.size() != spec.lengthscales.size() || x2.size() != spec.lengthscales.size()) {
        throw InvalidArgumentError("point dimension does not match kernel lengthscales");
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = (x[i] - x2[i]) / spec.lengthscales[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double matern32(const KernelSpec& spec, const Vector& x, const Vector& x2) {
    static const double sqrt3 = std::sqrt(3.0);
    const double r = scaled_distance(spec, x, x2);
    return spec.variance * (1.0 + sqrt3 * r) * std::exp(-sqrt3 * r);
}

double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& x2) {
    switch (spec.family) {
        case KernelSpec::Family::Matern32:
            return matern32(spec, x, x2);
    }
    throw InvalidArgumentError("unknown kernel family");
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X) {
    const Eigen::Index n = X.rows();
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = spec.variance;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = kernel_value(spec, X.row(i), X.row(j));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

Matrix kernel_cross(const KernelSpec& spec, const Matrix& A, const Matrix& B) {
    Matrix k(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            k(i, j) = kernel_value(spec, A.row(i), B.row(j));
        }
    }
    return k;
}

CholeskyResult cholesky_with_jitter(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw InvalidArgumentError("cholesky_with_jitter needs a square matrix");
    }
    for (double jitter = 1e-10; jitter <= 1e-4 * 1.0000001; jitter *= 10.0) {
        Matrix shifted = m;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() == Eigen::Success) {
            return CholeskyResult{Matrix(llt.matrixL()), jitter};
        }
    }
    throw FactorizationError("matrix is not positive definite even with maximum jitter");
}

}  // namespace gpcrbo
