#pragma once

#include "mtlasso/types.hpp"

#include <vector>

namespace mtlasso {

struct SolverOptions {
    int max_iters = 10000;       // sweeps
    double tol = 1e-9;           // max Euclidean row change in a sweep
    double kkt_tol = 1e-6;
    double support_tol = 1e-10;  // row-norm threshold for membership in the support

    void validate() const;
};

struct LassoFit {
    CoefficientMatrix b_hat;
    std::vector<Index> support;  // ascending, 0-based
    int iterations_used = 0;     // sweeps, full or active-set
    double kkt_residual = 0.0;
    double objective = 0.0;
    double lambda = 0.0;
    // Columns of X that are identically zero; their rows are pinned to zero.
    std::vector<Index> degenerate_columns;
};

/// (1/(2nT)) ||Y - X B||_F^2 + lambda ||B||_{2,1}
double lasso_objective(const ProblemData& data, const CoefficientMatrix& b, double lambda);

/// Multi-task Lasso by cyclic block coordinate descent over rows of B.
///
/// Each row update minimizes the objective exactly in that row:
///   c_j = (X e_j)^T (Y - X B + X e_j e_j^T B)
///   e_j^T B <- (1 - nT lambda / ||c_j||)_+ c_j / ||X e_j||^2
/// Sweeps run in ascending j. After a full sweep changes the support, the
/// active rows are cycled until they settle, then a full sweep is repeated.
/// The solve ends once a full sweep moves no row by more than opts.tol and the
/// KKT residual is below opts.kkt_tol; otherwise ConvergenceError is thrown.
LassoFit fit_multitask_lasso(const ProblemData& data, double lambda, const SolverOptions& opts = {});

/// Same, starting from `init` instead of zero.
LassoFit fit_multitask_lasso(const ProblemData& data, double lambda, const SolverOptions& opts,
                             const CoefficientMatrix& init);

/// Maximum over rows of the violation of the optimality conditions, in the
/// unnormalized scale of X^T (Y - X B):
///   active rows:  || (Y - XB)^T X e_j - nT lambda B^T e_j / ||B^T e_j|| ||
///   zero rows:    ( ||(Y - XB)^T X e_j|| - nT lambda )_+
double kkt_residual(const ProblemData& data, const CoefficientMatrix& b, double lambda);

/// Rows of b whose Euclidean norm exceeds support_tol, ascending.
std::vector<Index> support(const CoefficientMatrix& b, double support_tol = 0.0);

/// Smallest lambda for which B = 0 is optimal: max_j ||(X e_j)^T Y|| / (nT).
double lambda_max(const ProblemData& data);

}  // namespace mtlasso
