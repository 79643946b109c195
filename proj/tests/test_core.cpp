#include "helpers.hpp"
#include "mtlasso/core.hpp"
#include "mtlasso/matrix_io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

using namespace mtlasso;

TEST_CASE("group norm of simple matrices") {
    CHECK(group_norm_21(Matrix::Zero(4, 3)) == 0.0);
    Matrix b(2, 2);
    b << 3, 4, 0, 0;
    CHECK(group_norm_21(b) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(row_norms(b)(0) == doctest::Approx(5.0));
    CHECK(row_norms(b)(1) == 0.0);
}

TEST_CASE("group norm matches a scalar double loop") {
    std::mt19937_64 rng(3);
    const Matrix b = testutil::gaussian(3, 2, rng);
    double expected = 0.0;
    for (Index j = 0; j < 3; ++j) {
        double ss = 0.0;
        for (Index t = 0; t < 2; ++t) ss += b(j, t) * b(j, t);
        expected += std::sqrt(ss);
    }
    CHECK(group_norm_21(b) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("group norm is a norm") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const Matrix a = testutil::gaussian(6, 4, rng);
        const Matrix b = testutil::gaussian(6, 4, rng);
        const double c = -3.7 + 0.2 * rep;
        CHECK(group_norm_21(a + b) <= (group_norm_21(a) + group_norm_21(b)) * (1.0 + 1e-12));
        CHECK(group_norm_21(c * a) == doctest::Approx(std::abs(c) * group_norm_21(a)).epsilon(1e-12));
    }
}

TEST_CASE("group norm rejects non-finite input") {
    Matrix b = Matrix::Zero(2, 2);
    b(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(group_norm_21(b), InvalidInput);
}

TEST_CASE("default lambda closed form") {
    // n=100, p=400, T=4, s=4, sigma=1, max diag 1
    const double expected = 1.0 / std::sqrt(400.0) * (1.0 + std::sqrt(0.5 * std::log(100.0)));
    CHECK(default_lambda(100, 400, 4, 4, 1.0, 1.0) == doctest::Approx(expected).epsilon(1e-15));

    // Simulation-study scale: n=2000, p=6000, T=10, s=5.
    const double big = 1.0 / std::sqrt(20000.0) * (1.0 + std::sqrt(0.2 * std::log(1200.0)));
    CHECK(default_lambda(2000, 6000, 10, 5, 1.0, 1.0) == doctest::Approx(big).epsilon(1e-15));
}

TEST_CASE("default lambda scaling") {
    const double base = default_lambda(200, 500, 5, 5, 1.0, 1.0);
    CHECK(default_lambda(200, 500, 5, 5, 2.0, 1.0) == doctest::Approx(2.0 * base));
    CHECK(default_lambda(200, 500, 5, 5, 1.0, 4.0) == doctest::Approx(2.0 * base));
    CHECK(default_lambda(200, 500, 5, 5, 1.0, 1.0, 0.1, 0.2) == doctest::Approx(1.1 * 1.2 * base));
    CHECK(default_lambda(400, 500, 5, 5, 1.0, 1.0) < base);
    CHECK(default_lambda(200, 5000, 5, 5, 1.0, 1.0) > base);
    CHECK(default_lambda(200, 500, 5, 50, 1.0, 1.0) < base);

    RegularizationSpec spec;
    spec.sparsity_guess_s = 5;
    spec.sigma = 1.5;
    CHECK(default_lambda(200, 500, 5, spec, 1.0) == doctest::Approx(1.5 * base));
}

TEST_CASE("default lambda rejects s >= p and bad arguments") {
    CHECK_THROWS_AS(default_lambda(100, 10, 2, 10, 1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(default_lambda(100, 10, 2, 0, 1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(default_lambda(100, 10, 2, 1, 0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(default_lambda(100, 10, 2, 1, 1.0, 1.0, -0.1), InvalidInput);
}

TEST_CASE("problem data validation") {
    CHECK_THROWS_AS(ProblemData(Matrix::Zero(3, 2), Matrix::Zero(4, 1)), InvalidInput);
    Matrix y = Matrix::Zero(3, 2);
    y(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(ProblemData(Matrix::Zero(3, 2), y), InvalidInput);

    Matrix x(2, 1), yy(2, 2);
    x << 1, 2;
    yy << 1, 2, 3, 4;
    const ProblemData data(x, yy);
    const ProblemData one = data.task(1);
    CHECK(one.tasks() == 1);
    CHECK(one.y()(1, 0) == 4.0);
    CHECK_THROWS_AS(data.task(2), InvalidInput);
}

TEST_CASE("inference target validation") {
    InferenceTarget target{Vector::Zero(3), Vector::Ones(2)};
    CHECK_THROWS_AS(target.validate(3, 2), InvalidInput);
    target.direction_a = Vector::Ones(3);
    CHECK_NOTHROW(target.validate(3, 2));
    CHECK_THROWS_AS(target.validate(4, 2), InvalidInput);
}

TEST_CASE("matrix text formats round-trip every bit") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix m = testutil::gaussian(4, 3, rng);
        m(0, 0) *= 1e-300;
        m(1, 1) *= 1e300;
        m(2, 2) = -0.0;
        m(3, 0) = 0.1;
        const Matrix from_csv = io::parse_csv(io::to_csv(m));
        const Matrix from_json = io::parse_json(io::to_json(m));
        REQUIRE(from_csv.rows() == 4);
        REQUIRE(from_json.cols() == 3);
        for (Index i = 0; i < m.size(); ++i) {
            CHECK(std::memcmp(&from_csv.data()[i], &m.data()[i], sizeof(double)) == 0);
            CHECK(std::memcmp(&from_json.data()[i], &m.data()[i], sizeof(double)) == 0);
        }
    }
}

TEST_CASE("matrix parsing errors") {
    CHECK_THROWS_AS(io::parse_csv("1,2\n3\n"), InvalidInput);
    CHECK_THROWS_AS(io::parse_csv("1,abc\n"), InvalidInput);
    CHECK_THROWS_AS(io::parse_csv(""), InvalidInput);
    CHECK_THROWS_AS(io::parse_json("{\"rows\":2,\"cols\":2,\"data\":[1,2,3]}"), InvalidInput);
    CHECK_THROWS_AS(io::read_matrix("/nonexistent/file.csv"), InvalidInput);
}

TEST_CASE("atomic write leaves no temporary file") {
    const auto dir = std::filesystem::temp_directory_path() / "mtlasso_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "m.json";
    Matrix m(1, 2);
    m << 1.5, -2.25;
    io::write_matrix(path, m);
    CHECK(io::read_matrix(path) == m);
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        CHECK(entry.path().extension() != ".tmp");
    }
    std::filesystem::remove_all(dir);
}
