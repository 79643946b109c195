#include "mtlasso/nodewise.hpp"

#include <cmath>
#include <sstream>

namespace mtlasso {

std::string to_string(NodewiseVariant v) {
    return v == NodewiseVariant::plug_in_lasso ? "plug_in_lasso" : "scaled_lasso";
}

namespace {

Matrix drop_column(const Matrix& x, Index j) {
    Matrix out(x.rows(), x.cols() - 1);
    out.leftCols(j) = x.leftCols(j);
    out.rightCols(x.cols() - 1 - j) = x.rightCols(x.cols() - 1 - j);
    return out;
}

Vector insert_zero(const Vector& reduced, Index j) {
    Vector full(reduced.size() + 1);
    full.head(j) = reduced.head(j);
    full(j) = 0.0;
    full.tail(reduced.size() - j) = reduced.tail(reduced.size() - j);
    return full;
}

}  // namespace

NodewiseFit fit_nodewise(const Matrix& x, Index j, const NodewiseOptions& opts) {
    const Index n = x.rows();
    const Index p = x.cols();
    if (p < 2) throw InvalidInput("fit_nodewise: need at least two covariates");
    if (j < 0 || j >= p) throw InvalidInput("fit_nodewise: covariate index out of range");
    if (opts.eta < 0.0) throw InvalidInput("fit_nodewise: eta must be nonnegative");
    const double col_norm = x.col(j).norm();
    if (!(col_norm > 0.0)) throw InvalidInput("fit_nodewise: column " + std::to_string(j) + " is zero");

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double rate = (1.0 + opts.eta) * std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
    const ProblemData reduced(drop_column(x, j), x.col(j));

    double tau = opts.tau.value_or(col_norm / sqrt_n);
    if (!(tau > 0.0)) throw InvalidInput("fit_nodewise: tau must be positive");

    CoefficientMatrix gamma = CoefficientMatrix::Zero(p - 1, 1);
    double penalty = tau * rate;
    int alternations = 0;
    std::ostringstream trace;

    if (opts.variant == NodewiseVariant::plug_in_lasso) {
        gamma = fit_multitask_lasso(reduced, penalty, opts.solver).b_hat;
        alternations = 1;
    } else {
        bool converged = false;
        while (alternations < opts.max_alternations) {
            penalty = tau * rate;
            gamma = fit_multitask_lasso(reduced, penalty, opts.solver, gamma).b_hat;
            ++alternations;
            const double next = (reduced.y() - reduced.x() * gamma).norm() / sqrt_n;
            trace << ' ' << next;
            if (next < 1e-12) {
                throw NumericError("fit_nodewise: residual scale collapsed to " + std::to_string(next) +
                                   " (column " + std::to_string(j) + " is degenerate)");
            }
            const double step = std::abs(next - tau);
            tau = next;
            if (step <= opts.tau_tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw NumericError("fit_nodewise: scaled Lasso did not reach a fixed point in " +
                               std::to_string(opts.max_alternations) + " alternations; tau trace:" + trace.str());
        }
    }

    NodewiseFit fit;
    fit.j = j;
    fit.variant = opts.variant;
    fit.gamma_hat = insert_zero(gamma.col(0), j);
    fit.z_hat = x.col(j) - x * fit.gamma_hat;
    fit.inner_product = fit.z_hat.dot(x.col(j));
    fit.kkt_sup_norm = (reduced.x().transpose() * fit.z_hat).cwiseAbs().maxCoeff();
    fit.penalty = penalty;
    fit.alternations = alternations;
    fit.tau_hat = opts.variant == NodewiseVariant::scaled_lasso ? fit.z_hat.norm() / sqrt_n : tau;
    if (fit.tau_hat < 1e-12) throw NumericError("fit_nodewise: degenerate residual scale");
    return fit;
}

TauAlternatives tau_alternatives(const NodewiseFit& fit, Index n) {
    if (n < 1) throw InvalidInput("tau_alternatives: n must be positive");
    if (!(fit.inner_product > 0.0)) {
        throw NumericError("tau_alternatives: z_j^T X e_j = " + std::to_string(fit.inner_product) +
                           " is not positive; the nodewise fit failed");
    }
    const double dn = static_cast<double>(n);
    return {std::sqrt(fit.inner_product / dn), fit.z_hat.norm() / std::sqrt(dn)};
}

}  // namespace mtlasso
