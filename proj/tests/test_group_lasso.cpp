#include "helpers.hpp"
#include "mtlasso/group_lasso.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace mtlasso;

TEST_CASE("scalar soft thresholding") {
    Matrix x(1, 1), y(1, 1);
    x << 1.0;
    y << 2.0;
    const ProblemData data(x, y);
    const LassoFit fit = fit_multitask_lasso(data, 0.5);
    CHECK(fit.b_hat(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(fit.support == std::vector<Index>{0});
    CHECK(kkt_residual(data, fit.b_hat, 0.5) <= 1e-12);
    CHECK(fit.objective == doctest::Approx(0.5 * 0.25 + 0.5 * 1.5));
}

TEST_CASE("penalty above lambda_max gives the zero solution") {
    const auto in = testutil::sparse_instance(30, 12, 3, 3, 0.5, 1);
    const ProblemData data(in.x, in.y);
    const double lmax = lambda_max(data);
    for (double factor : {1.0, 1.5, 10.0}) {
        const LassoFit fit = fit_multitask_lasso(data, factor * lmax);
        CHECK(fit.b_hat.isZero(0.0));
        CHECK(fit.support.empty());
        CHECK(fit.kkt_residual == 0.0);
    }
    const LassoFit below = fit_multitask_lasso(data, 0.9 * lmax);
    CHECK_FALSE(below.support.empty());
}

TEST_CASE("objective matches the proximal-gradient oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto in = testutil::sparse_instance(30, 10, 3, 3, 0.5, seed);
        const ProblemData data(in.x, in.y);
        const double lambda = 0.15 * lambda_max(data) * static_cast<double>(seed);
        const LassoFit fit = fit_multitask_lasso(data, lambda);
        const Matrix oracle = testutil::proximal_gradient(in.x, in.y, lambda);
        const double reference = lasso_objective(data, oracle, lambda);
        CHECK(fit.kkt_residual <= 1e-6);
        CHECK(fit.objective <= reference + 1e-8 * std::abs(reference));
        CHECK(std::abs(fit.objective - reference) <= 1e-8 * std::abs(reference));
    }
}

TEST_CASE("kkt residual detects a perturbed optimum") {
    const auto in = testutil::sparse_instance(40, 15, 4, 3, 0.3, 7);
    const ProblemData data(in.x, in.y);
    const double lambda = 0.2 * lambda_max(data);
    const LassoFit fit = fit_multitask_lasso(data, lambda);
    REQUIRE_FALSE(fit.support.empty());
    CHECK(kkt_residual(data, fit.b_hat, lambda) <= 1e-6);
    Matrix perturbed = fit.b_hat;
    perturbed(fit.support.front(), 0) += 0.1;
    CHECK(kkt_residual(data, perturbed, lambda) > 1e-3);
}

TEST_CASE("support extraction") {
    CHECK(support(Matrix::Zero(3, 2)).empty());
    Matrix b = Matrix::Zero(3, 2);
    b(0, 1) = 1.0;
    b(2, 0) = -2.0;
    CHECK(support(b) == std::vector<Index>{0, 2});
    b(2, 0) = 1e-12;
    CHECK(support(b, 1e-10) == std::vector<Index>{0});
}

TEST_CASE("support equals the nonzero rows left by the solver") {
    const auto in = testutil::sparse_instance(50, 30, 3, 5, 0.5, 9);
    const ProblemData data(in.x, in.y);
    const LassoFit fit = fit_multitask_lasso(data, 0.1 * lambda_max(data));
    CHECK(fit.support == support(fit.b_hat, 0.0));
}

TEST_CASE("rescaling X and Y together rescales lambda") {
    const auto in = testutil::sparse_instance(40, 20, 3, 4, 0.5, 13);
    const double c = 3.0;
    const ProblemData data(in.x, in.y);
    const ProblemData scaled(c * in.x, c * in.y);
    const double lambda = 0.1 * lambda_max(data);
    const LassoFit a = fit_multitask_lasso(data, lambda);
    const LassoFit b = fit_multitask_lasso(scaled, c * c * lambda);
    CHECK((a.b_hat - b.b_hat).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("warm start at the solution finishes immediately") {
    const auto in = testutil::sparse_instance(40, 20, 3, 4, 0.5, 17);
    const ProblemData data(in.x, in.y);
    const double lambda = 0.1 * lambda_max(data);
    const LassoFit fit = fit_multitask_lasso(data, lambda);
    const LassoFit again = fit_multitask_lasso(data, lambda, SolverOptions{}, fit.b_hat);
    CHECK(again.iterations_used <= 2);
    CHECK((again.b_hat - fit.b_hat).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("zero columns are pinned to zero rows") {
    auto in = testutil::sparse_instance(30, 8, 2, 2, 0.5, 19);
    in.x.col(3).setZero();
    const ProblemData data(in.x, in.y);
    const LassoFit fit = fit_multitask_lasso(data, 0.05 * lambda_max(data));
    CHECK(fit.degenerate_columns == std::vector<Index>{3});
    CHECK(fit.b_hat.row(3).isZero(0.0));
    CHECK(fit.kkt_residual <= 1e-6);
}

TEST_CASE("iteration budget exhaustion raises ConvergenceError") {
    const auto in = testutil::sparse_instance(30, 40, 3, 10, 0.1, 23);
    const ProblemData data(in.x, in.y);
    SolverOptions opts;
    opts.max_iters = 1;
    try {
        fit_multitask_lasso(data, 0.01 * lambda_max(data), opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations() == 1);
        CHECK(e.kkt_residual() > opts.kkt_tol);
        CHECK(e.last_iterate().rows() == 40);
    }
}

TEST_CASE("solver rejects bad arguments") {
    const auto in = testutil::sparse_instance(10, 5, 2, 1, 0.1, 29);
    const ProblemData data(in.x, in.y);
    CHECK_THROWS_AS(fit_multitask_lasso(data, 0.0), InvalidInput);
    CHECK_THROWS_AS(fit_multitask_lasso(data, -1.0), InvalidInput);
    SolverOptions opts;
    opts.tol = 0.0;
    CHECK_THROWS_AS(fit_multitask_lasso(data, 0.1, opts), InvalidInput);
    CHECK_THROWS_AS(fit_multitask_lasso(data, 0.1, SolverOptions{}, Matrix::Zero(4, 2)), InvalidInput);
}
