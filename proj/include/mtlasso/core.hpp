#pragma once

#include "mtlasso/types.hpp"

namespace mtlasso {

/// Default eta for the nodewise penalty tau(1+eta)sqrt(2 log(p)/n).
inline constexpr double kDefaultNodewiseEta = 0.01;

/// Euclidean norm of every row of b.
Vector row_norms(const CoefficientMatrix& b);

/// Mixed l_{2,1} norm: the sum of Euclidean row norms.
double group_norm_21(const CoefficientMatrix& b);

/// Default penalty level for the multi-task Lasso:
///
///   (1+eta2)(1+eta1) sigma sqrt(max_j Sigma_jj) (nT)^{-1/2} (1 + sqrt((2/T) log(p/s)))
///
/// With eta1 = eta2 = 0 this is the level used in the simulation study.
/// Requires 1 <= s < p.
double default_lambda(Index n, Index p, Index tasks, Index s, double sigma, double sigma_jj_max,
                      double eta1 = 0.0, double eta2 = 0.0);

double default_lambda(Index n, Index p, Index tasks, const RegularizationSpec& spec, double sigma_jj_max);

}  // namespace mtlasso
