#include "mtlasso/special.hpp"
#include "mtlasso/types.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <cmath>

using namespace mtlasso;

TEST_CASE("closed-form quantiles") {
    CHECK(std::abs(chi_quantile(2, 0.05) - std::sqrt(-2.0 * std::log(0.05))) <= 1e-10);
    CHECK(std::abs(chi_quantile(2, 0.05) - 2.447747) <= 1e-6);
    CHECK(std::abs(chi_quantile(1, 0.05) - 1.959964) <= 1e-6);
    CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) <= 1e-12);
    CHECK(std::abs(normal_quantile(0.025) + 1.959963984540054) <= 1e-12);
    CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("chi cdf closed forms") {
    for (double q : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        CHECK(chi_cdf(q, 2) == doctest::Approx(1.0 - std::exp(-0.5 * q * q)).epsilon(1e-13));
        CHECK(chi_cdf(q, 1) == doctest::Approx(std::erf(q / std::sqrt(2.0))).epsilon(1e-13));
    }
    CHECK(chi_cdf(0.0, 3) == 0.0);
    CHECK(chi_cdf(-1.0, 3) == 0.0);
}

TEST_CASE("incomplete gamma agrees with an independent implementation") {
    for (double a : {0.5, 1.0, 2.5, 5.0, 50.0, 200.0}) {
        for (double x : {1e-3, 0.3, 1.0, 3.0, 10.0, 60.0, 250.0}) {
            const double ours = regularized_gamma_p(a, x);
            const double ref = boost::math::gamma_p(a, x);
            CHECK(std::abs(ours - ref) <= 1e-12);
        }
    }
}

TEST_CASE("quantile inverts the cdf") {
    for (int dof : {1, 2, 3, 5, 10, 40, 400}) {
        for (double alpha : {0.01, 0.05, 0.1, 0.5, 0.9}) {
            const double q = chi_quantile(dof, alpha);
            CHECK(chi_cdf(q, dof) == doctest::Approx(1.0 - alpha).epsilon(1e-11));
        }
    }
}

TEST_CASE("large-T quantile order") {
    const double t = 400.0;
    const double z = normal_quantile(0.95);
    CHECK(std::abs(chi_quantile(400, 0.05) - std::sqrt(t) - z / std::sqrt(2.0)) <= 0.05);
}

TEST_CASE("quantiles are monotone") {
    CHECK(chi_quantile(5, 0.01) > chi_quantile(5, 0.05));
    CHECK(chi_quantile(6, 0.05) > chi_quantile(5, 0.05));
}

TEST_CASE("argument errors") {
    CHECK_THROWS_AS(chi_quantile(0, 0.05), InvalidInput);
    CHECK_THROWS_AS(chi_quantile(2, 0.0), InvalidInput);
    CHECK_THROWS_AS(chi_quantile(2, 1.0), InvalidInput);
    CHECK_THROWS_AS(normal_quantile(1.0), InvalidInput);
    CHECK_THROWS_AS(regularized_gamma_p(-1.0, 1.0), InvalidInput);
}
