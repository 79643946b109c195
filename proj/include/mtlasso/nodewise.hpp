#pragma once

#include "mtlasso/core.hpp"
#include "mtlasso/group_lasso.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mtlasso {

enum class NodewiseVariant { plug_in_lasso, scaled_lasso };

std::string to_string(NodewiseVariant v);

struct NodewiseOptions {
    NodewiseVariant variant = NodewiseVariant::scaled_lasso;
    double eta = kDefaultNodewiseEta;
    // Scale for the plug-in variant; defaults to the pilot ||X e_j|| / sqrt(n).
    std::optional<double> tau;
    int max_alternations = 50;
    double tau_tol = 1e-8;
    SolverOptions solver;
};

/// Regression of column j on the others:
///   gamma = argmin ||X e_j - X_{-j} g||^2 / (2n) + mu ||g||_1,
///   mu = tau (1 + eta) sqrt(2 log(p) / n),
/// and the residual z_j = X e_j - X gamma used to debias row j without
/// knowing Sigma.
struct NodewiseFit {
    Index j = 0;
    Vector gamma_hat;  // length p, gamma_hat[j] == 0
    Vector z_hat;      // length n
    double tau_hat = 0.0;
    NodewiseVariant variant = NodewiseVariant::scaled_lasso;
    double inner_product = 0.0;  // z_j^T X e_j
    double kkt_sup_norm = 0.0;   // ||X_{-j}^T z_j||_inf
    double penalty = 0.0;        // mu of the final Lasso solve
    int alternations = 0;
};

/// Plug-in variant: one Lasso solve at the supplied or pilot tau.
/// Scaled variant: alternates Lasso solves with tau <- ||z_j|| / sqrt(n) until
/// tau moves by at most tau_tol; at that fixed point the Lasso solution is the
/// square-root Lasso solution. tau_hat is then exactly ||z_j|| / sqrt(n).
NodewiseFit fit_nodewise(const Matrix& x, Index j, const NodewiseOptions& opts = {});

struct TauAlternatives {
    double tau_from_inner = 0.0;  // (z_j^T X e_j / n)^{1/2}
    double tau_from_norm = 0.0;   // ||z_j|| / sqrt(n)
};

TauAlternatives tau_alternatives(const NodewiseFit& fit, Index n);

}  // namespace mtlasso
