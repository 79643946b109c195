#include "helpers.hpp"
#include "mtlasso/nodewise.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>

using namespace mtlasso;

TEST_CASE("orthogonal columns leave z_j = X e_j") {
    std::mt19937_64 rng(1);
    const Index n = 30, p = 6;
    Eigen::HouseholderQR<Matrix> qr(testutil::gaussian(n, p, rng));
    const Matrix x = std::sqrt(static_cast<double>(n)) * Matrix(qr.householderQ()).leftCols(p);
    for (NodewiseVariant variant : {NodewiseVariant::plug_in_lasso, NodewiseVariant::scaled_lasso}) {
        NodewiseOptions opts;
        opts.variant = variant;
        const NodewiseFit fit = fit_nodewise(x, 2, opts);
        CHECK(fit.gamma_hat.isZero(0.0));
        CHECK((fit.z_hat - x.col(2)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(fit.tau_hat == doctest::Approx(x.col(2).norm() / std::sqrt(double(n))).epsilon(1e-14));
        const TauAlternatives alt = tau_alternatives(fit, n);
        CHECK(alt.tau_from_inner == doctest::Approx(alt.tau_from_norm).epsilon(1e-14));
    }
}

TEST_CASE("collinear pair matches one-dimensional soft thresholding") {
    std::mt19937_64 rng(2);
    const Index n = 5;
    const double c = 2.0;
    Matrix x(n, 2);
    x.col(0) = testutil::gaussian(n, 1, rng);
    x.col(1) = c * x.col(0);
    NodewiseOptions opts;
    opts.variant = NodewiseVariant::plug_in_lasso;
    opts.tau = 0.3;
    const NodewiseFit fit = fit_nodewise(x, 1, opts);
    const double mu = 0.3 * (1.0 + opts.eta) * std::sqrt(2.0 * std::log(2.0) / n);
    const double sq = x.col(0).squaredNorm();
    const double g = std::max(0.0, c * sq - n * mu) / sq;
    CHECK(fit.penalty == doctest::Approx(mu).epsilon(1e-15));
    CHECK(fit.gamma_hat(0) == doctest::Approx(g).epsilon(1e-10));
    CHECK(fit.gamma_hat(1) == 0.0);
    CHECK(fit.z_hat.norm() == doctest::Approx((c - g) * x.col(0).norm()).epsilon(1e-9));
}

TEST_CASE("plug-in KKT bound") {
    std::mt19937_64 rng(3);
    const Matrix x = testutil::gaussian(80, 40, rng);
    NodewiseOptions opts;
    opts.variant = NodewiseVariant::plug_in_lasso;
    for (Index j : {0, 7, 39}) {
        const NodewiseFit fit = fit_nodewise(x, j, opts);
        CHECK(fit.kkt_sup_norm <= 80.0 * fit.penalty + 1e-6);
        CHECK(fit.gamma_hat(j) == 0.0);
    }
}

TEST_CASE("scaled variant reaches its fixed point") {
    std::mt19937_64 rng(4);
    const Index n = 100;
    const Matrix x = testutil::gaussian(n, 60, rng);
    NodewiseOptions opts;
    const NodewiseFit fit = fit_nodewise(x, 0, opts);
    const TauAlternatives alt = tau_alternatives(fit, n);
    CHECK(alt.tau_from_norm == fit.tau_hat);
    CHECK(alt.tau_from_inner * alt.tau_from_inner ==
          doctest::Approx(fit.z_hat.dot(x.col(0)) / n).epsilon(1e-14));
    const double rate = (1.0 + opts.eta) * std::sqrt(2.0 * std::log(60.0) / n);
    CHECK(std::abs(fit.penalty / rate - fit.tau_hat) <= 1e-7);
    CHECK((fit.z_hat - (x.col(0) - x * fit.gamma_hat)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity covariance: tau_hat close to one") {
    std::mt19937_64 rng(5);
    const Index n = 500, p = 50;
    const Matrix x = testutil::gaussian(n, p, rng);
    double total = 0.0;
    for (Index j = 0; j < p; ++j) total += fit_nodewise(x, j).tau_hat;
    CHECK(std::abs(total / p - 1.0) <= 0.05);
}

TEST_CASE("nodewise errors") {
    std::mt19937_64 rng(6);
    Matrix x = testutil::gaussian(10, 4, rng);
    CHECK_THROWS_AS(fit_nodewise(x, 4), InvalidInput);
    CHECK_THROWS_AS(fit_nodewise(x.leftCols(1), 0), InvalidInput);
    x.col(1).setZero();
    CHECK_THROWS_AS(fit_nodewise(x, 1), InvalidInput);

    NodewiseFit bad;
    bad.inner_product = -1.0;
    CHECK_THROWS_AS(tau_alternatives(bad, 10), NumericError);
}
