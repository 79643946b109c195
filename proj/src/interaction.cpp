#include "mtlasso/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtlasso {

std::string to_string(InteractionMethod m) { return m == InteractionMethod::naive ? "naive" : "woodbury"; }

namespace {

Matrix restrict_columns(const Matrix& x, const std::vector<Index>& support) {
    Matrix xs(x.rows(), static_cast<Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) xs.col(static_cast<Index>(k)) = x.col(support[k]);
    return xs;
}

void check_inputs(const Matrix& x, const CoefficientMatrix& b_hat, const std::vector<Index>& support) {
    if (b_hat.rows() != x.cols()) throw InvalidInput("interaction: B-hat must have one row per column of X");
    for (std::size_t k = 0; k < support.size(); ++k) {
        const Index j = support[k];
        if (j < 0 || j >= b_hat.rows()) throw InvalidInput("interaction: support index out of range");
        if (k > 0 && j <= support[k - 1]) throw InvalidInput("interaction: support must be strictly ascending");
        if (!(b_hat.row(j).norm() > 0.0)) throw InvalidInput("interaction: support row has zero norm");
    }
}

InteractionMatrix empty_support(Index tasks, InteractionMethod method) {
    return {Matrix::Zero(tasks, tasks), 0, method, true};
}

}  // namespace

Matrix hessian_block(const CoefficientMatrix& b_hat, Index j, double lambda) {
    if (j < 0 || j >= b_hat.rows()) throw InvalidInput("hessian_block: row index out of range");
    const Vector row = b_hat.row(j).transpose();
    const double norm = row.norm();
    if (!(norm > 0.0)) throw InvalidInput("hessian_block: row " + std::to_string(j) + " is zero");
    const Index t = row.size();
    Matrix h = Matrix::Identity(t, t) - row * row.transpose() / (norm * norm);
    return (lambda / norm) * h;
}

bool has_full_column_rank(const Matrix& xs) {
    if (xs.cols() == 0) return true;
    if (xs.cols() > xs.rows()) return false;
    Eigen::ColPivHouseholderQR<Matrix> qr(xs);
    qr.setThreshold(static_cast<double>(std::max(xs.rows(), xs.cols())) * std::numeric_limits<double>::epsilon());
    return qr.rank() == xs.cols();
}

InteractionMatrix interaction_naive(const Matrix& x, const CoefficientMatrix& b_hat, double lambda,
                                    const std::vector<Index>& support, const InteractionOptions& opts) {
    check_inputs(x, b_hat, support);
    if (lambda < 0.0) throw InvalidInput("interaction_naive: lambda must be nonnegative");
    const Index tasks = b_hat.cols();
    if (support.empty()) return empty_support(tasks, InteractionMethod::naive);

    const Index k = static_cast<Index>(support.size());
    const Index dim = k * tasks;
    if (dim > opts.naive_cap) {
        throw InvalidInput("interaction_naive: |S| T = " + std::to_string(dim) + " exceeds the cap of " +
                           std::to_string(opts.naive_cap) + "; use the woodbury method");
    }

    const Matrix xs = restrict_columns(x, support);
    const Matrix gram = xs.transpose() * xs;
    const double nt = static_cast<double>(x.rows()) * static_cast<double>(tasks);

    // Vectorization index of (task t, support position i) is t * k + i.
    Matrix system = Matrix::Zero(dim, dim);
    for (Index t = 0; t < tasks; ++t) system.block(t * k, t * k, k, k) = gram;
    if (lambda > 0.0) {
        for (Index i = 0; i < k; ++i) {
            const Matrix h = hessian_block(b_hat, support[static_cast<std::size_t>(i)], lambda);
            for (Index t = 0; t < tasks; ++t) {
                for (Index u = 0; u < tasks; ++u) system(t * k + i, u * k + i) += nt * h(t, u);
            }
        }
    }

    // The system matrix is symmetric PSD, so its singular values are the
    // absolute eigenvalues and the eigenvectors double as singular vectors.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(system);
    if (eig.info() != Eigen::Success) throw NumericError("interaction_naive: eigendecomposition failed");
    const Vector& values = eig.eigenvalues();
    const double sigma_max = values.cwiseAbs().maxCoeff();
    const double cutoff = static_cast<double>(dim) * std::numeric_limits<double>::epsilon() * sigma_max;
    Vector inv_values(dim);
    for (Index i = 0; i < dim; ++i) inv_values(i) = std::abs(values(i)) > cutoff ? 1.0 / values(i) : 0.0;
    const Matrix& vecs = eig.eigenvectors();
    const Matrix pinv = vecs * inv_values.asDiagonal() * vecs.transpose();

    Matrix a_hat(tasks, tasks);
    for (Index t = 0; t < tasks; ++t) {
        for (Index u = 0; u < tasks; ++u) {
            a_hat(t, u) = (pinv.block(t * k, u * k, k, k) * gram).trace();
        }
    }
    return {a_hat, k, InteractionMethod::naive, has_full_column_rank(xs)};
}

InteractionMatrix interaction_fast(const Matrix& x, const CoefficientMatrix& b_hat, double lambda,
                                   const std::vector<Index>& support, const InteractionOptions& opts) {
    check_inputs(x, b_hat, support);
    if (!(lambda > 0.0)) throw InvalidInput("interaction_fast: lambda must be positive");
    const Index tasks = b_hat.cols();
    if (support.empty()) return empty_support(tasks, InteractionMethod::woodbury);

    const Index k = static_cast<Index>(support.size());
    const double ntl = static_cast<double>(x.rows()) * static_cast<double>(tasks) * lambda;
    const Matrix xs = restrict_columns(x, support);
    const Matrix gram = xs.transpose() * xs;

    Vector v(k);
    Matrix c(k, tasks);
    for (Index i = 0; i < k; ++i) {
        const auto row = b_hat.row(support[static_cast<std::size_t>(i)]);
        const double norm = row.norm();
        v(i) = ntl / norm;
        c.row(i) = std::sqrt(ntl / (norm * norm * norm)) * row;
    }

    Matrix shifted = gram;
    shifted.diagonal() += v;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) throw NumericError("interaction_fast: G + diag(v) is not positive definite");
    Matrix w = llt.solve(Matrix::Identity(k, k));
    w = 0.5 * (w + w.transpose()).eval();
    const Matrix q = w * gram * w;

    Matrix p = (c * c.transpose()).cwiseProduct(w);
    p.diagonal().array() -= 1.0;

    Eigen::PartialPivLU<Matrix> lu(p);
    const double rcond = lu.rcond();
    if (!(rcond * opts.max_capacitance_condition > 1.0)) {
        if (k * tasks <= opts.naive_cap) return interaction_naive(x, b_hat, lambda, support, opts);
        throw NumericError("interaction_fast: capacitance matrix is numerically singular (rcond " +
                           std::to_string(rcond) + ") and |S| T exceeds the pseudoinverse cap");
    }
    const Matrix identity = Matrix::Identity(k, k);
    Matrix p_inv = lu.solve(identity);
    p_inv += lu.solve(identity - p * p_inv);  // one step of iterative refinement

    const Matrix weights = q.cwiseProduct(p_inv);
    Matrix a_hat = -(c.transpose() * weights * c);
    a_hat.diagonal().array() += (gram * w).trace();
    return {a_hat, k, InteractionMethod::woodbury, has_full_column_rank(xs)};
}

Matrix correction_matrix(const InteractionMatrix& a_hat, Index n) {
    if (n < 1) throw InvalidInput("correction_matrix: n must be positive");
    const Index t = a_hat.a_hat.rows();
    const Matrix m = Matrix::Identity(t, t) - a_hat.a_hat / static_cast<double>(n);
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericError(
            "correction_matrix: I - A/n is not positive definite; this requires rank(X_S) = |S| and |S| < n (|S| = " +
            std::to_string(a_hat.support_size) + ", n = " + std::to_string(n) + ")");
    }
    Matrix inv = llt.solve(Matrix::Identity(t, t));
    return 0.5 * (inv + inv.transpose());
}

InteractionReport inspect(const Matrix& a_hat) {
    InteractionReport r;
    r.symmetry_error = (a_hat - a_hat.transpose()).cwiseAbs().maxCoeff();
    const Matrix sym = 0.5 * (a_hat + a_hat.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = eig.eigenvalues().minCoeff();
    r.op_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    return r;
}

}  // namespace mtlasso
