#pragma once

namespace mtlasso {

/// Regularized lower incomplete gamma function P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// CDF of chi_k, the square root of a chi-square variable with k degrees of freedom.
double chi_cdf(double q, int dof);

/// q > 0 with P(sqrt(chi^2_dof) <= q) = 1 - alpha, to 1e-10 or better.
double chi_quantile(int dof, double alpha);

double normal_cdf(double z);

/// z with Phi(z) = prob, 0 < prob < 1. Computed from the one-degree chi
/// quantile, so both share one special-function implementation.
double normal_quantile(double prob);

}  // namespace mtlasso
