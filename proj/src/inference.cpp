#include "mtlasso/inference.hpp"

#include "mtlasso/special.hpp"

#include <cmath>

namespace mtlasso {

std::string to_string(IntervalVariant v) {
    switch (v) {
        case IntervalVariant::known_sigma: return "known_sigma";
        case IntervalVariant::unknown_sigma: return "unknown_sigma";
        case IntervalVariant::single_task: return "single_task";
    }
    return "?";
}

std::string to_string(PivotKind k) {
    switch (k) {
        case PivotKind::normal_known: return "normal_known";
        case PivotKind::normal_unknown: return "normal_unknown";
        case PivotKind::chi_known: return "chi_known";
        case PivotKind::chi_unknown: return "chi_unknown";
        case PivotKind::chi_sigma_hat: return "chi_sigma_hat";
        case PivotKind::chi_sigma_hat_unknown: return "chi_sigma_hat_unknown";
    }
    return "?";
}

std::string to_string(TauChoice c) {
    switch (c) {
        case TauChoice::true_tau: return "true_tau";
        case TauChoice::inner: return "inner";
        case TauChoice::norm: return "norm";
    }
    return "?";
}

std::string to_string(EllipsoidVariant v) {
    switch (v) {
        case EllipsoidVariant::hat_E: return "hat_E";
        case EllipsoidVariant::check_E: return "check_E";
        case EllipsoidVariant::check_E_sigma_hat: return "check_E_sigma_hat";
        case EllipsoidVariant::hat_E_j: return "hat_E_j";
        case EllipsoidVariant::hat_E_j_sigma_hat: return "hat_E_j_sigma_hat";
    }
    return "?";
}

// ---------------------------------------------------------------------------

DebiasedFit::DebiasedFit(const ProblemData& data, CoefficientMatrix b_hat, InteractionMatrix a_hat)
    : b_hat_(std::move(b_hat)), a_hat_(std::move(a_hat)) {
    if (b_hat_.rows() != data.p() || b_hat_.cols() != data.tasks()) {
        throw InvalidInput("DebiasedFit: B-hat has wrong shape");
    }
    if (a_hat_.a_hat.rows() != data.tasks() || a_hat_.a_hat.cols() != data.tasks()) {
        throw InvalidInput("DebiasedFit: A-hat must be T x T");
    }
    residual_ = data.y() - data.x() * b_hat_;
    correction_ = correction_matrix(a_hat_, data.n());
    sigma_hat_ = residual_.norm() / std::sqrt(static_cast<double>(data.n()) * static_cast<double>(data.tasks()));
    if (data.tasks() < data.n()) {
        gamma_llt_.compute(residual_.transpose() * residual_);
        gamma_ok_ = gamma_llt_.info() == Eigen::Success &&
                    gamma_llt_.matrixLLT().diagonal().minCoeff() > 0.0;
    }
}

Matrix DebiasedFit::n_minus_a() const {
    Matrix m = -a_hat_.a_hat;
    m.diagonal().array() += static_cast<double>(n());
    return m;
}

void DebiasedFit::require_gamma() const {
    if (tasks() >= n()) throw InvalidInput("chi-square machinery requires T < n");
    if (!gamma_ok_) throw NumericError("Gamma = R^T R is singular; T exceeds the effective residual rank");
}

double DebiasedFit::gamma_quadratic_form(const Vector& w) const {
    require_gamma();
    const Vector s = gamma_llt_.matrixL().solve(w);
    return s.squaredNorm();
}

Matrix DebiasedFit::gamma_inverse() const {
    require_gamma();
    Matrix inv = gamma_llt_.solve(Matrix::Identity(tasks(), tasks()));
    return 0.5 * (inv + inv.transpose());
}

double sigma_hat(const ProblemData& data, const CoefficientMatrix& b_hat) {
    return (data.y() - data.x() * b_hat).norm() /
           std::sqrt(static_cast<double>(data.n()) * static_cast<double>(data.tasks()));
}

KnownDirection normalize_direction(const Vector& a, const Matrix& sigma, const Matrix& x) {
    if (sigma.rows() != a.size() || sigma.cols() != a.size()) throw InvalidInput("normalize_direction: shape mismatch");
    if (a.isZero(0.0)) throw InvalidInput("normalize_direction: direction must be nonzero");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw NumericError("normalize_direction: Sigma is not positive definite");
    const double scale = llt.matrixL().solve(a).norm();  // ||Sigma^{-1/2} a||
    KnownDirection dir;
    dir.a = a / scale;
    dir.precision_a = llt.solve(dir.a);
    if (x.cols() != a.size()) throw InvalidInput("normalize_direction: X has wrong column count");
    dir.z0 = x * dir.precision_a;
    return dir;
}

KnownDirection normalize_direction_with_precision(const Vector& a, const Matrix& precision, const Matrix& x) {
    if (precision.rows() != a.size() || precision.cols() != a.size() || x.cols() != a.size()) {
        throw InvalidInput("normalize_direction: shape mismatch");
    }
    if (a.isZero(0.0)) throw InvalidInput("normalize_direction: direction must be nonzero");
    const double quad = a.dot(precision * a);
    if (!(quad > 0.0)) throw NumericError("normalize_direction: precision matrix is not positive definite");
    KnownDirection dir;
    dir.a = a / std::sqrt(quad);
    dir.precision_a = precision * dir.a;
    dir.z0 = x * dir.precision_a;
    return dir;
}

// ---------------------------------------------------------------------------

namespace {

void check_task_vector(const DebiasedFit& fit, const Vector& b) {
    if (b.size() != fit.tasks()) throw InvalidInput("task vector has wrong length");
    if (b.isZero(0.0)) throw InvalidInput("task vector must be nonzero");
}

void check_direction(const DebiasedFit& fit, const KnownDirection& dir) {
    if (dir.a.size() != fit.b_hat().rows()) throw InvalidInput("direction has wrong length");
    if (dir.z0.size() != fit.n()) throw InvalidInput("z0 has wrong length");
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
}

void check_nodewise(const DebiasedFit& fit, const NodewiseFit& nodewise) {
    if (nodewise.z_hat.size() != fit.n()) throw InvalidInput("nodewise residual has wrong length");
    if (nodewise.j < 0 || nodewise.j >= fit.b_hat().rows()) throw InvalidInput("nodewise index out of range");
    if (!(nodewise.inner_product > 0.0)) {
        throw NumericError("z_j^T X e_j is not positive; the nodewise fit failed");
    }
}

Vector unit(Index size, Index k) {
    if (k < 0 || k >= size) throw InvalidInput("task index out of range");
    return Vector::Unit(size, k);
}

}  // namespace

PivotReport normal_pivot_known_sigma(const DebiasedFit& fit, const KnownDirection& dir, const Vector& b,
                                     const CoefficientMatrix& b_star) {
    check_direction(fit, dir);
    check_task_vector(fit, b);
    if (b_star.rows() != fit.b_hat().rows() || b_star.cols() != fit.tasks()) {
        throw InvalidInput("ground truth has wrong shape");
    }
    const double n = static_cast<double>(fit.n());
    const Vector corrected = fit.residual() * (fit.correction() * b);
    const double bias = n * dir.a.dot((fit.b_hat() - b_star) * b);
    PivotReport r;
    r.kind = PivotKind::normal_known;
    r.value = (bias + dir.z0.dot(corrected)) / corrected.norm();
    r.sigma_hat = fit.sigma_hat();
    return r;
}

NormalInterval ci_known_sigma(const DebiasedFit& fit, const KnownDirection& dir, Index task, double alpha) {
    check_direction(fit, dir);
    check_alpha(alpha);
    const Vector e = unit(fit.tasks(), task);
    const double n = static_cast<double>(fit.n());
    const Vector corrected = fit.residual() * (fit.correction() * e);
    NormalInterval ci;
    ci.alpha = alpha;
    ci.variant = IntervalVariant::known_sigma;
    ci.center = dir.a.dot(fit.b_hat().col(task)) + dir.z0.dot(corrected) / n;
    ci.half_length = chi_quantile(1, alpha) * corrected.norm() / n;
    ci.lower = ci.center - ci.half_length;
    ci.upper = ci.center + ci.half_length;
    return ci;
}

double select_tau(const NodewiseFit& nodewise, Index n, TauChoice choice, std::optional<double> true_tau) {
    switch (choice) {
        case TauChoice::true_tau:
            if (!true_tau || !(*true_tau > 0.0)) throw InvalidInput("true_tau choice needs a positive population tau");
            return *true_tau;
        case TauChoice::inner: return tau_alternatives(nodewise, n).tau_from_inner;
        case TauChoice::norm: return tau_alternatives(nodewise, n).tau_from_norm;
    }
    throw InvalidInput("unknown tau choice");
}

PivotReport normal_pivot_unknown_sigma(const DebiasedFit& fit, const NodewiseFit& nodewise, const Vector& b,
                                       const CoefficientMatrix& b_star, TauChoice choice,
                                       std::optional<double> true_tau) {
    check_nodewise(fit, nodewise);
    check_task_vector(fit, b);
    if (b_star.rows() != fit.b_hat().rows() || b_star.cols() != fit.tasks()) {
        throw InvalidInput("ground truth has wrong shape");
    }
    const double n = static_cast<double>(fit.n());
    const double tau = select_tau(nodewise, fit.n(), choice, true_tau);
    const Vector corrected = fit.residual() * (fit.correction() * b);
    const double bias = n * (fit.b_hat().row(nodewise.j) - b_star.row(nodewise.j)).dot(b.transpose());
    const double correction = n / nodewise.inner_product * nodewise.z_hat.dot(corrected);
    PivotReport r;
    r.kind = PivotKind::normal_unknown;
    r.value = (bias + correction) / (corrected.norm() / tau);
    r.sigma_hat = fit.sigma_hat();
    r.tau = tau;
    return r;
}

NormalInterval ci_unknown_sigma(const DebiasedFit& fit, const NodewiseFit& nodewise, Index task, double alpha,
                                TauChoice choice, std::optional<double> true_tau) {
    check_nodewise(fit, nodewise);
    check_alpha(alpha);
    const Vector e = unit(fit.tasks(), task);
    const double n = static_cast<double>(fit.n());
    const double tau = select_tau(nodewise, fit.n(), choice, true_tau);
    const Vector corrected = fit.residual() * (fit.correction() * e);
    NormalInterval ci;
    ci.alpha = alpha;
    ci.variant = IntervalVariant::unknown_sigma;
    ci.center = fit.b_hat()(nodewise.j, task) + nodewise.z_hat.dot(corrected) / nodewise.inner_product;
    ci.half_length = chi_quantile(1, alpha) * corrected.norm() / (n * tau);
    ci.lower = ci.center - ci.half_length;
    ci.upper = ci.center + ci.half_length;
    return ci;
}

NormalInterval single_task_interval(const ProblemData& task_data, const CoefficientMatrix& beta_hat,
                                    Index support_size, const KnownDirection& dir, double alpha) {
    if (task_data.tasks() != 1) throw InvalidInput("single_task_interval: expects a single response");
    if (beta_hat.rows() != task_data.p() || beta_hat.cols() != 1) {
        throw InvalidInput("single_task_interval: coefficient vector has wrong shape");
    }
    check_alpha(alpha);
    if (support_size >= task_data.n()) {
        throw InvalidInput("single_task_interval: |S| >= n, the degrees-of-freedom adjustment is undefined");
    }
    const Vector r = task_data.y().col(0) - task_data.x() * beta_hat.col(0);
    const double dof = static_cast<double>(task_data.n() - support_size);
    NormalInterval ci;
    ci.alpha = alpha;
    ci.variant = IntervalVariant::single_task;
    ci.center = dir.a.dot(beta_hat.col(0)) + dir.z0.dot(r) / dof;
    ci.half_length = chi_quantile(1, alpha) * r.norm() / dof;
    ci.lower = ci.center - ci.half_length;
    ci.upper = ci.center + ci.half_length;
    return ci;
}

WidthComparison width_comparison(const NormalInterval& multi, const NormalInterval& single) {
    if (multi.alpha != single.alpha) throw InvalidInput("width_comparison: intervals have different levels");
    if (!(single.half_length > 0.0)) throw InvalidInput("width_comparison: single-task interval has zero length");
    WidthComparison w;
    w.prefer_multitask = multi.length() < single.length();
    w.relative_change = (multi.length() - single.length()) / single.length();
    w.note =
        "choosing between the two intervals after seeing the data makes two tests; "
        "use level alpha/2 for each (Bonferroni) to keep coverage 1 - alpha";
    return w;
}

// ---------------------------------------------------------------------------

double EllipsoidRegion::quadratic(const Vector& theta) const {
    if (theta.size() != center_u.size()) throw InvalidInput("ellipsoid: point has wrong dimension");
    const Vector d = theta - center_u;
    return d.dot(shape_c * d);
}

namespace {

void require_chi_domain(const DebiasedFit& fit) {
    if (fit.tasks() >= fit.n()) throw InvalidInput("chi-square machinery requires T < n");
}

// Center shared by hat_E, check_E and check_E_sigma_hat: B^T a + (nI - A)^{-1} R^T z0.
Vector known_center(const DebiasedFit& fit, const KnownDirection& dir) {
    const double n = static_cast<double>(fit.n());
    return fit.b_hat().transpose() * dir.a + fit.correction() * (fit.residual().transpose() * dir.z0) / n;
}

}  // namespace

double known_sigma_statistic(const DebiasedFit& fit, const KnownDirection& dir, const Vector& theta,
                             EllipsoidVariant variant) {
    check_direction(fit, dir);
    require_chi_domain(fit);
    if (theta.size() != fit.tasks()) throw InvalidInput("theta has wrong length");
    const double n = static_cast<double>(fit.n());
    const double t = static_cast<double>(fit.tasks());
    const Vector rz = fit.residual().transpose() * dir.z0;
    const Vector gap = fit.b_hat().transpose() * dir.a - theta;
    switch (variant) {
        case EllipsoidVariant::hat_E: {
            const Vector w = rz + fit.n_minus_a() * gap;
            return std::sqrt((1.0 - t / n) * fit.gamma_quadratic_form(w));
        }
        case EllipsoidVariant::check_E: {
            const Vector w = fit.correction() * rz + n * gap;
            return std::sqrt((1.0 - t / n) * fit.gamma_quadratic_form(w));
        }
        case EllipsoidVariant::check_E_sigma_hat: {
            if (!(fit.sigma_hat() > 0.0)) throw NumericError("sigma_hat is zero");
            const Vector w = fit.correction() * rz + n * gap;
            return w.norm() / (fit.sigma_hat() * std::sqrt(n));
        }
        default: throw InvalidInput("known_sigma_statistic: not a known-Sigma region");
    }
}

double unknown_sigma_statistic(const DebiasedFit& fit, const NodewiseFit& nodewise, const Vector& theta,
                               EllipsoidVariant variant) {
    check_nodewise(fit, nodewise);
    require_chi_domain(fit);
    if (theta.size() != fit.tasks()) throw InvalidInput("theta has wrong length");
    const double n = static_cast<double>(fit.n());
    const double t = static_cast<double>(fit.tasks());
    const double scale = nodewise.inner_product / n;
    const Vector gap = fit.b_hat().row(nodewise.j).transpose() - theta;
    const Vector w = fit.residual().transpose() * nodewise.z_hat + scale * (fit.n_minus_a() * gap);
    const double z_norm = nodewise.z_hat.norm();
    switch (variant) {
        case EllipsoidVariant::hat_E_j: return std::sqrt((n - t) * fit.gamma_quadratic_form(w)) / z_norm;
        case EllipsoidVariant::hat_E_j_sigma_hat:
            if (!(fit.sigma_hat() > 0.0)) throw NumericError("sigma_hat is zero");
            return w.norm() / (z_norm * fit.sigma_hat());
        default: throw InvalidInput("unknown_sigma_statistic: not an unknown-Sigma region");
    }
}

EllipsoidRegion ellipsoid_known_sigma(const DebiasedFit& fit, const KnownDirection& dir, double alpha,
                                      EllipsoidVariant variant) {
    check_direction(fit, dir);
    check_alpha(alpha);
    require_chi_domain(fit);
    if (variant != EllipsoidVariant::hat_E && variant != EllipsoidVariant::check_E) {
        throw InvalidInput("ellipsoid_known_sigma: variant must be hat_E or check_E");
    }
    const double n = static_cast<double>(fit.n());
    const double t = static_cast<double>(fit.tasks());
    EllipsoidRegion region;
    region.alpha = alpha;
    region.variant = variant;
    region.q = chi_quantile(static_cast<int>(fit.tasks()), alpha);
    region.center_u = known_center(fit, dir);
    const double factor = (1.0 - t / n) / (region.q * region.q);
    const Matrix gamma_inv = fit.gamma_inverse();
    if (variant == EllipsoidVariant::hat_E) {
        const Matrix m = fit.n_minus_a();
        region.shape_c = factor * (m * gamma_inv * m);
    } else {
        region.shape_c = factor * n * n * gamma_inv;
    }
    return region;
}

EllipsoidRegion ellipsoid_sigma_hat(const DebiasedFit& fit, const KnownDirection& dir, double alpha) {
    check_direction(fit, dir);
    check_alpha(alpha);
    require_chi_domain(fit);
    if (!(fit.sigma_hat() > 0.0)) throw NumericError("ellipsoid_sigma_hat: sigma_hat is zero");
    const double n = static_cast<double>(fit.n());
    EllipsoidRegion region;
    region.alpha = alpha;
    region.variant = EllipsoidVariant::check_E_sigma_hat;
    region.q = chi_quantile(static_cast<int>(fit.tasks()), alpha);
    region.center_u = known_center(fit, dir);
    const double radius = region.q * fit.sigma_hat() * std::sqrt(n);
    region.shape_c = Matrix::Identity(fit.tasks(), fit.tasks()) * (n * n / (radius * radius));
    return region;
}

EllipsoidRegion ellipsoid_unknown_sigma(const DebiasedFit& fit, const NodewiseFit& nodewise, double alpha,
                                        EllipsoidScale scale) {
    check_nodewise(fit, nodewise);
    check_alpha(alpha);
    require_chi_domain(fit);
    const double n = static_cast<double>(fit.n());
    const double t = static_cast<double>(fit.tasks());
    const double c = nodewise.inner_product / n;
    const double z_sq = nodewise.z_hat.squaredNorm();

    EllipsoidRegion region;
    region.alpha = alpha;
    region.q = chi_quantile(static_cast<int>(fit.tasks()), alpha);
    // w(theta) = c (nI - A)(u - theta) with u below.
    region.center_u = fit.b_hat().row(nodewise.j).transpose() +
                      fit.correction() * (fit.residual().transpose() * nodewise.z_hat) / (n * c);
    const Matrix m = fit.n_minus_a();
    const double qq = region.q * region.q;
    if (scale == EllipsoidScale::gamma_hat_matrix) {
        region.variant = EllipsoidVariant::hat_E_j;
        region.shape_c = ((n - t) * c * c / (z_sq * qq)) * (m * fit.gamma_inverse() * m);
    } else {
        if (!(fit.sigma_hat() > 0.0)) throw NumericError("ellipsoid_unknown_sigma: sigma_hat is zero");
        region.variant = EllipsoidVariant::hat_E_j_sigma_hat;
        const double s2 = fit.sigma_hat() * fit.sigma_hat();
        region.shape_c = (c * c / (z_sq * s2 * qq)) * (m * m);
    }
    return region;
}

double ellipsoid_radius(const EllipsoidRegion& region) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(region.shape_c, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    if (!(smallest > 0.0)) throw NumericError("ellipsoid_radius: shape matrix is not positive definite");
    return 1.0 / std::sqrt(smallest);
}

RowTest test_row_null(const EllipsoidRegion& region) {
    const double quad = region.quadratic(Vector::Zero(region.center_u.size()));
    return {quad > 1.0, region.q * std::sqrt(quad)};
}

}  // namespace mtlasso
