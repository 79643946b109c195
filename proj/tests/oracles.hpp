#pragma once

#include "mtlasso/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace testutil {

// Accelerated proximal gradient (FISTA with restart) for
// (1/(2nT)) ||Y - XB||_F^2 + lambda ||B||_{2,1}; shares no code with the
// coordinate-descent solver.
inline mtlasso::Matrix proximal_gradient(const mtlasso::Matrix& x, const mtlasso::Matrix& y, double lambda,
                                         int iterations = 20000) {
    using mtlasso::Index;
    using mtlasso::Matrix;
    const double nt = static_cast<double>(x.rows()) * static_cast<double>(y.cols());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(x.transpose() * x, Eigen::EigenvaluesOnly);
    const double step = nt / eig.eigenvalues().maxCoeff();
    auto objective = [&](const Matrix& b) {
        return (y - x * b).squaredNorm() / (2.0 * nt) + lambda * b.rowwise().norm().sum();
    };
    auto prox = [&](Matrix v) {
        for (Index j = 0; j < v.rows(); ++j) {
            const double norm = v.row(j).norm();
            const double shrink = norm > step * lambda ? 1.0 - step * lambda / norm : 0.0;
            v.row(j) *= shrink;
        }
        return v;
    };
    Matrix b = Matrix::Zero(x.cols(), y.cols());
    Matrix z = b;
    double t = 1.0;
    double last = objective(b);
    for (int k = 0; k < iterations; ++k) {
        const Matrix grad = -x.transpose() * (y - x * z) / nt;
        Matrix next = prox(z - step * grad);
        const double obj = objective(next);
        if (obj > last) {  // restart momentum
            t = 1.0;
            z = b;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = next + ((t - 1.0) / t_next) * (next - b);
        b = std::move(next);
        t = t_next;
        last = obj;
    }
    return b;
}

}  // namespace testutil
