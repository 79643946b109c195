#include "mtlasso/core.hpp"

#include <cmath>

namespace mtlasso {

bool all_finite(const Matrix& m) { return m.allFinite(); }

ProblemData::ProblemData(Matrix x, Matrix y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.rows() < 1 || x_.cols() < 1 || y_.cols() < 1) {
        throw InvalidInput("ProblemData: need n >= 1, p >= 1, T >= 1");
    }
    if (x_.rows() != y_.rows()) {
        throw InvalidInput("ProblemData: x has " + std::to_string(x_.rows()) + " rows but y has " +
                           std::to_string(y_.rows()));
    }
    if (!x_.allFinite() || !y_.allFinite()) {
        throw InvalidInput("ProblemData: non-finite entry in x or y");
    }
}

ProblemData ProblemData::task(Index t) const {
    if (t < 0 || t >= tasks()) {
        throw InvalidInput("ProblemData::task: task index out of range");
    }
    return ProblemData(x_, y_.col(t));
}

void RegularizationSpec::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be positive and finite");
    if (eta1 < 0.0 || eta2 < 0.0) throw InvalidInput("eta1 and eta2 must be nonnegative");
    if (sparsity_guess_s < 1) throw InvalidInput("sparsity guess s must be positive");
    if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
}

void InferenceTarget::validate(Index p, Index tasks) const {
    if (direction_a.size() != p) throw InvalidInput("direction a has wrong length");
    if (task_vector_b.size() != tasks) throw InvalidInput("task vector b has wrong length");
    if (direction_a.isZero(0.0)) throw InvalidInput("direction a must be nonzero");
    if (task_vector_b.isZero(0.0)) throw InvalidInput("task vector b must be nonzero");
}

Vector row_norms(const CoefficientMatrix& b) { return b.rowwise().norm(); }

double group_norm_21(const CoefficientMatrix& b) {
    if (!b.allFinite()) throw InvalidInput("group_norm_21: non-finite entry");
    return b.rowwise().norm().sum();
}

double default_lambda(Index n, Index p, Index tasks, Index s, double sigma, double sigma_jj_max, double eta1,
                      double eta2) {
    if (n < 1 || p < 1 || tasks < 1 || s < 1) throw InvalidInput("default_lambda: n, p, T, s must be positive");
    if (s >= p) throw InvalidInput("default_lambda: need s < p so that log(p/s) > 0");
    if (!(sigma > 0.0) || !(sigma_jj_max > 0.0)) {
        throw InvalidInput("default_lambda: sigma and max_j Sigma_jj must be positive");
    }
    if (eta1 < 0.0 || eta2 < 0.0) throw InvalidInput("default_lambda: eta1, eta2 must be nonnegative");
    const double nt = static_cast<double>(n) * static_cast<double>(tasks);
    const double log_ratio = std::log(static_cast<double>(p) / static_cast<double>(s));
    return (1.0 + eta2) * (1.0 + eta1) * sigma * std::sqrt(sigma_jj_max) / std::sqrt(nt) *
           (1.0 + std::sqrt(2.0 / static_cast<double>(tasks) * log_ratio));
}

double default_lambda(Index n, Index p, Index tasks, const RegularizationSpec& spec, double sigma_jj_max) {
    return default_lambda(n, p, tasks, spec.sparsity_guess_s, spec.sigma, sigma_jj_max, spec.eta1, spec.eta2);
}

}  // namespace mtlasso
