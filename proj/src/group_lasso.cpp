#include "mtlasso/group_lasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace mtlasso {

void SolverOptions::validate() const {
    if (max_iters < 1) throw InvalidInput("SolverOptions: max_iters must be positive");
    if (!(tol > 0.0)) throw InvalidInput("SolverOptions: tol must be positive");
    if (!(kkt_tol > 0.0)) throw InvalidInput("SolverOptions: kkt_tol must be positive");
    if (support_tol < 0.0) throw InvalidInput("SolverOptions: support_tol must be nonnegative");
}

double lasso_objective(const ProblemData& data, const CoefficientMatrix& b, double lambda) {
    const double nt = static_cast<double>(data.n()) * static_cast<double>(data.tasks());
    return (data.y() - data.x() * b).squaredNorm() / (2.0 * nt) + lambda * b.rowwise().norm().sum();
}

double kkt_residual(const ProblemData& data, const CoefficientMatrix& b, double lambda) {
    if (b.rows() != data.p() || b.cols() != data.tasks()) {
        throw InvalidInput("kkt_residual: coefficient matrix has wrong shape");
    }
    const double ntl = static_cast<double>(data.n()) * static_cast<double>(data.tasks()) * lambda;
    const Matrix grad = data.x().transpose() * (data.y() - data.x() * b);
    double worst = 0.0;
    for (Index j = 0; j < b.rows(); ++j) {
        const double norm = b.row(j).norm();
        double violation;
        if (norm > 0.0) {
            violation = (grad.row(j) - (ntl / norm) * b.row(j)).norm();
        } else {
            violation = std::max(0.0, grad.row(j).norm() - ntl);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

std::vector<Index> support(const CoefficientMatrix& b, double support_tol) {
    std::vector<Index> out;
    for (Index j = 0; j < b.rows(); ++j) {
        if (b.row(j).norm() > support_tol) out.push_back(j);
    }
    return out;
}

double lambda_max(const ProblemData& data) {
    const double nt = static_cast<double>(data.n()) * static_cast<double>(data.tasks());
    return (data.x().transpose() * data.y()).rowwise().norm().maxCoeff() / nt;
}

namespace {

class CoordinateDescent {
public:
    CoordinateDescent(const ProblemData& data, double lambda, const CoefficientMatrix& init)
        : x_(data.x()),
          b_(init),
          r_(data.y() - data.x() * init),
          col_sq_(data.x().colwise().squaredNorm().transpose()),
          ntl_(static_cast<double>(data.n()) * static_cast<double>(data.tasks()) * lambda),
          lambda_(lambda),
          nt_(static_cast<double>(data.n()) * static_cast<double>(data.tasks())),
          update_(data.tasks()),
          grad_(data.tasks()) {
        for (Index j = 0; j < x_.cols(); ++j) {
            if (col_sq_(j) == 0.0) {
                degenerate_.push_back(j);
                b_.row(j).setZero();
            }
        }
    }

    // Returns the largest Euclidean row change.
    template <class Rows>
    double sweep(const Rows& rows) {
        double max_change = 0.0;
        for (Index j : rows) max_change = std::max(max_change, update_row(j));
        return max_change;
    }

    double update_row(Index j) {
        const double sq = col_sq_(j);
        if (sq == 0.0) return 0.0;
        grad_.noalias() = x_.col(j).transpose() * r_;
        // c_j = x_j^T R_{-j} = x_j^T R + ||x_j||^2 b_j
        update_ = grad_ + sq * b_.row(j);
        const double cnorm = update_.norm();
        if (cnorm <= ntl_) {
            update_.setZero();
        } else {
            update_ *= (1.0 - ntl_ / cnorm) / sq;
        }
        grad_ = update_ - b_.row(j);  // reuse as the row delta
        const double change = grad_.norm();
        if (change > 0.0) {
            r_.noalias() -= x_.col(j) * grad_;
            b_.row(j) = update_;
        }
        return change;
    }

    std::vector<Index> active_rows() const {
        std::vector<Index> out;
        for (Index j = 0; j < b_.rows(); ++j) {
            if (b_.row(j).squaredNorm() > 0.0) out.push_back(j);
        }
        return out;
    }

    double objective() const { return r_.squaredNorm() / (2.0 * nt_) + lambda_ * b_.rowwise().norm().sum(); }

    const CoefficientMatrix& coefficients() const { return b_; }
    const std::vector<Index>& degenerate() const { return degenerate_; }

private:
    const Matrix& x_;
    CoefficientMatrix b_;
    Matrix r_;
    Vector col_sq_;
    double ntl_;
    double lambda_;
    double nt_;
    Eigen::RowVectorXd update_;
    Eigen::RowVectorXd grad_;
    std::vector<Index> degenerate_;
};

struct AllRows {
    Index p;
    struct It {
        Index j;
        Index operator*() const { return j; }
        It& operator++() {
            ++j;
            return *this;
        }
        bool operator!=(const It& o) const { return j != o.j; }
    };
    It begin() const { return {0}; }
    It end() const { return {p}; }
};

}  // namespace

LassoFit fit_multitask_lasso(const ProblemData& data, double lambda, const SolverOptions& opts) {
    return fit_multitask_lasso(data, lambda, opts, CoefficientMatrix::Zero(data.p(), data.tasks()));
}

LassoFit fit_multitask_lasso(const ProblemData& data, double lambda, const SolverOptions& opts,
                             const CoefficientMatrix& init) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("fit_multitask_lasso: lambda must be positive");
    opts.validate();
    if (init.rows() != data.p() || init.cols() != data.tasks() || !init.allFinite()) {
        throw InvalidInput("fit_multitask_lasso: initial iterate has wrong shape or non-finite entries");
    }

    CoordinateDescent cd(data, lambda, init);
    const AllRows all{data.p()};
    int sweeps = 0;
    double kkt = 0.0;
#ifndef NDEBUG
    double previous_objective = cd.objective();
    auto check_descent = [&] {
        const double obj = cd.objective();
        assert(obj <= previous_objective + 1e-12 * (1.0 + std::abs(previous_objective)));
        previous_objective = obj;
    };
#else
    auto check_descent = [] {};
#endif

    while (sweeps < opts.max_iters) {
        const double change = cd.sweep(all);
        ++sweeps;
        check_descent();
        if (change < opts.tol) {
            kkt = kkt_residual(data, cd.coefficients(), lambda);
            if (kkt <= opts.kkt_tol) break;
        }
        // Settle the active set before the next full pass.
        auto active = cd.active_rows();
        if (active.empty() || change < opts.tol) continue;
        while (sweeps < opts.max_iters) {
            const double inner = cd.sweep(active);
            ++sweeps;
            check_descent();
            if (inner < opts.tol) break;
        }
    }

    kkt = kkt_residual(data, cd.coefficients(), lambda);
    if (sweeps >= opts.max_iters && kkt > opts.kkt_tol) {
        throw ConvergenceError("fit_multitask_lasso: no convergence within " + std::to_string(opts.max_iters) +
                                   " sweeps (kkt residual " + std::to_string(kkt) + ")",
                               cd.coefficients(), kkt, sweeps);
    }

    LassoFit fit;
    fit.b_hat = cd.coefficients();
    fit.support = support(fit.b_hat, opts.support_tol);
    fit.iterations_used = sweeps;
    fit.kkt_residual = kkt;
    fit.objective = lasso_objective(data, fit.b_hat, lambda);
    fit.lambda = lambda;
    fit.degenerate_columns = cd.degenerate();
    return fit;
}

}  // namespace mtlasso
