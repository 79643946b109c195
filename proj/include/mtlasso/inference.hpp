#pragma once

#include "mtlasso/interaction.hpp"
#include "mtlasso/nodewise.hpp"
#include "mtlasso/types.hpp"

#include <optional>
#include <string>

namespace mtlasso {

/// Everything the debiasing formulas need from one multi-task Lasso fit:
/// the residual R = Y - X B-hat, A-hat, (I - A/n)^{-1} and the Cholesky
/// factor of Gamma = R^T R (when T < n and Gamma is positive definite).
class DebiasedFit {
public:
    DebiasedFit(const ProblemData& data, CoefficientMatrix b_hat, InteractionMatrix a_hat);

    Index n() const noexcept { return residual_.rows(); }
    Index tasks() const noexcept { return residual_.cols(); }
    const CoefficientMatrix& b_hat() const noexcept { return b_hat_; }
    const Matrix& residual() const noexcept { return residual_; }
    const InteractionMatrix& interaction() const noexcept { return a_hat_; }
    /// (I - A/n)^{-1}
    const Matrix& correction() const noexcept { return correction_; }
    /// n I - A
    Matrix n_minus_a() const;
    /// ||Y - X B-hat||_F / sqrt(nT)
    double sigma_hat() const noexcept { return sigma_hat_; }

    /// w^T Gamma^{-1} w, through the Cholesky factor. Throws when Gamma is
    /// singular or T >= n.
    double gamma_quadratic_form(const Vector& w) const;
    Matrix gamma_inverse() const;

private:
    void require_gamma() const;

    CoefficientMatrix b_hat_;
    Matrix residual_;
    InteractionMatrix a_hat_;
    Matrix correction_;
    double sigma_hat_ = 0.0;
    Eigen::LLT<Matrix> gamma_llt_;
    bool gamma_ok_ = false;
};

/// ||Y - X B-hat||_F / sqrt(nT)
double sigma_hat(const ProblemData& data, const CoefficientMatrix& b_hat);

/// A direction scaled so that ||Sigma^{-1/2} a|| = 1, with Sigma^{-1} a and
/// z0 = X Sigma^{-1} a.
struct KnownDirection {
    Vector a;
    Vector precision_a;
    Vector z0;
};

/// Normalizes a using a Cholesky factorization of the covariance Sigma.
KnownDirection normalize_direction(const Vector& a, const Matrix& sigma, const Matrix& x);

/// Same, when Sigma^{-1} is available directly.
KnownDirection normalize_direction_with_precision(const Vector& a, const Matrix& precision, const Matrix& x);

// ---------------------------------------------------------------------------
// Normal pivots and intervals

enum class IntervalVariant { known_sigma, unknown_sigma, single_task };
std::string to_string(IntervalVariant v);

struct NormalInterval {
    double center = 0.0;
    double half_length = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.05;
    IntervalVariant variant = IntervalVariant::known_sigma;

    double length() const noexcept { return 2.0 * half_length; }
    bool contains(double value) const noexcept { return lower <= value && value <= upper; }
};

enum class PivotKind { normal_known, normal_unknown, chi_known, chi_unknown, chi_sigma_hat, chi_sigma_hat_unknown };
std::string to_string(PivotKind k);

struct PivotReport {
    double value = 0.0;
    PivotKind kind = PivotKind::normal_known;
    double sigma_hat = 0.0;
    double tau = 0.0;  // scale used in the denominator (unknown-Sigma pivots)
    double q = 0.0;    // chi quantile, when a level was requested
};

/// [n a^T (B - B*) b + z0^T R (I - A/n)^{-1} b] / ||R (I - A/n)^{-1} b||.
/// Needs the ground truth, so it is a simulation diagnostic.
PivotReport normal_pivot_known_sigma(const DebiasedFit& fit, const KnownDirection& dir, const Vector& b,
                                     const CoefficientMatrix& b_star);

/// Interval for a^T B* e_task:
///   a^T B e_t + z0^T R (I - A/n)^{-1} e_t / n  +-  z_{alpha/2} ||R (I - A/n)^{-1} e_t|| / n
NormalInterval ci_known_sigma(const DebiasedFit& fit, const KnownDirection& dir, Index task, double alpha = 0.05);

enum class TauChoice { true_tau, inner, norm };
std::string to_string(TauChoice c);

/// Scale for the unknown-Sigma denominator. true_tau needs the population value.
double select_tau(const NodewiseFit& nodewise, Index n, TauChoice choice, std::optional<double> true_tau = {});

/// [n e_j^T (B - B*) b + n (z_j^T X e_j)^{-1} z_j^T R (I - A/n)^{-1} b] / (tau^{-1} ||R (I - A/n)^{-1} b||)
PivotReport normal_pivot_unknown_sigma(const DebiasedFit& fit, const NodewiseFit& nodewise, const Vector& b,
                                       const CoefficientMatrix& b_star, TauChoice choice,
                                       std::optional<double> true_tau = {});

/// Interval for e_j^T B* e_task from the pivot above.
NormalInterval ci_unknown_sigma(const DebiasedFit& fit, const NodewiseFit& nodewise, Index task,
                                double alpha = 0.05, TauChoice choice = TauChoice::norm,
                                std::optional<double> true_tau = {});

/// Single-task debiased Lasso interval on (X, y) with T = 1:
///   center a^T beta + z0^T (y - X beta) / (n - |S|)
///   half   z_{alpha/2} ||y - X beta|| / (n - |S|)
NormalInterval single_task_interval(const ProblemData& task_data, const CoefficientMatrix& beta_hat,
                                    Index support_size, const KnownDirection& dir, double alpha = 0.05);

struct WidthComparison {
    bool prefer_multitask = false;
    double relative_change = 0.0;  // (length_multi - length_single) / length_single
    std::string note;
};

/// Data-driven choice between the two intervals. Using both requires a
/// Bonferroni correction, which the note records.
WidthComparison width_comparison(const NormalInterval& multi, const NormalInterval& single);

// ---------------------------------------------------------------------------
// Chi-square regions {theta : (theta - u)^T C (theta - u) <= 1}

enum class EllipsoidVariant { hat_E, check_E, check_E_sigma_hat, hat_E_j, hat_E_j_sigma_hat };
std::string to_string(EllipsoidVariant v);

struct EllipsoidRegion {
    Vector center_u;
    Matrix shape_c;
    double alpha = 0.05;
    double q = 0.0;
    EllipsoidVariant variant = EllipsoidVariant::hat_E;

    double quadratic(const Vector& theta) const;
    bool contains(const Vector& theta) const { return quadratic(theta) <= 1.0; }
};

/// The defining statistics, evaluated at a candidate row theta. Evaluated at
/// theta = B*^T a (or B*^T e_j) they are the chi pivots; a region's
/// membership test is statistic <= q.
///
/// hat_E:             (1 - T/n)^{1/2} ||Gamma^{-1/2} [R^T z0 + (nI - A)(B^T a - theta)]||
/// check_E:           (1 - T/n)^{1/2} ||Gamma^{-1/2} [(I - A/n)^{-1} R^T z0 + n (B^T a - theta)]||
/// check_E_sigma_hat: ||(I - A/n)^{-1} R^T z0 + n (B^T a - theta)|| / (sigma_hat sqrt(n))
double known_sigma_statistic(const DebiasedFit& fit, const KnownDirection& dir, const Vector& theta,
                             EllipsoidVariant variant);

/// With w = R^T z_j + (z_j^T X e_j / n)(nI - A)(B^T e_j - theta):
/// hat_E_j:           sqrt(n - T) / ||z_j|| * ||Gamma^{-1/2} w||
/// hat_E_j_sigma_hat: ||w|| / (||z_j|| sigma_hat)
double unknown_sigma_statistic(const DebiasedFit& fit, const NodewiseFit& nodewise, const Vector& theta,
                               EllipsoidVariant variant);

EllipsoidRegion ellipsoid_known_sigma(const DebiasedFit& fit, const KnownDirection& dir, double alpha,
                                      EllipsoidVariant variant);

EllipsoidRegion ellipsoid_sigma_hat(const DebiasedFit& fit, const KnownDirection& dir, double alpha);

enum class EllipsoidScale { gamma_hat_matrix, sigma_hat };

EllipsoidRegion ellipsoid_unknown_sigma(const DebiasedFit& fit, const NodewiseFit& nodewise, double alpha,
                                        EllipsoidScale scale);

/// Half-length of the largest axis of the region, phi_min(C)^{-1/2}.
double ellipsoid_radius(const EllipsoidRegion& region);

struct RowTest {
    bool reject = false;
    double pivot_at_zero = 0.0;  // the defining statistic at theta = 0
};

/// Rejects H0: row = 0 iff 0 lies outside the region.
RowTest test_row_null(const EllipsoidRegion& region);

}  // namespace mtlasso
