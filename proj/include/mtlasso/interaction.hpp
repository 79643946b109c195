#pragma once

#include "mtlasso/types.hpp"

#include <string>
#include <vector>

namespace mtlasso {

enum class InteractionMethod { naive, woodbury };

std::string to_string(InteractionMethod m);

/// The T x T interaction matrix A-hat of a multi-task Lasso fit.
///
/// For u, v in R^T,
///   u^T A v = trace[(u^T (x) X_S) (I_T (x) X_S^T X_S + nT H)^+ (v (x) X_S^T)]
/// where X_S keeps the support columns, H = sum_{j in S} H^(j) (x) e_j e_j^T and
/// H^(j) is the Hessian of lambda ||.|| at row j of B-hat. It generalizes the
/// Lasso's degrees of freedom |S| (which it equals when T = 1).
struct InteractionMatrix {
    Matrix a_hat;
    Index support_size = 0;
    InteractionMethod method = InteractionMethod::woodbury;
    bool rank_ok = false;  // rank(X_S) == |S|
};

struct InteractionOptions {
    // Largest |S| T for which the dense pseudoinverse route is allowed.
    Index naive_cap = 6000;
    // The Woodbury route falls back to the pseudoinverse when the estimated
    // condition number of its |S| x |S| capacitance matrix exceeds this.
    double max_capacitance_condition = 1e12;
};

/// H^(j) = lambda / ||b_j|| (I - b_j b_j^T / ||b_j||^2), with b_j = B^T e_j.
Matrix hessian_block(const CoefficientMatrix& b_hat, Index j, double lambda);

/// Direct evaluation through the pseudoinverse of the |S|T x |S|T matrix.
/// lambda = 0 is allowed and drops the Hessian term.
InteractionMatrix interaction_naive(const Matrix& x, const CoefficientMatrix& b_hat, double lambda,
                                    const std::vector<Index>& support, const InteractionOptions& opts = {});

/// Sherman-Morrison-Woodbury evaluation needing only |S| x |S| inverses:
///   G = X_S^T X_S,  v_j = nT lambda / ||b_j||,  W = (G + diag v)^{-1},  Q = W G W
///   c_j = (nT lambda / ||b_j||^3)^{1/2} b_j
///   P_jk = -1{j=k} + (c_j^T c_k) W_jk
///   A = trace(G W) I_T - C^T (Q o P^{-1}) C
/// with C the |S| x T matrix whose rows are c_j and o the entrywise product.
InteractionMatrix interaction_fast(const Matrix& x, const CoefficientMatrix& b_hat, double lambda,
                                   const std::vector<Index>& support, const InteractionOptions& opts = {});

/// (I - A/n)^{-1}, via Cholesky of I - A/n. Throws NumericError when
/// I - A/n is not positive definite, which requires rank(X_S) = |S| < n.
Matrix correction_matrix(const InteractionMatrix& a_hat, Index n);

/// Rank test of a design restricted to its support, by QR with column pivoting.
bool has_full_column_rank(const Matrix& xs);

struct InteractionReport {
    double symmetry_error = 0.0;  // max |A - A^T|
    double min_eigenvalue = 0.0;
    double op_norm = 0.0;
};

InteractionReport inspect(const Matrix& a_hat);

}  // namespace mtlasso
