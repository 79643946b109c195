#include "helpers.hpp"
#include "mtlasso/simulation.hpp"

#include <doctest.h>
#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace mtlasso;

TEST_CASE("covariance construction") {
    const GroundTruth gt = make_sigma(100, 5, 42);
    CHECK(gt.sigma_mat.diagonal().maxCoeff() == 1.0);
    CHECK((gt.sigma_mat - gt.sigma_mat.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((gt.precision * gt.sigma_mat - Matrix::Identity(100, 100)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(gt.precision_col_support == std::vector<Index>{0, 1, 2, 3, 4});
    CHECK(gt.precision(1, 0) == doctest::Approx(gt.precision(4, 0)));
    CHECK((gt.sigma_chol * gt.sigma_chol.transpose() - gt.sigma_mat).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gt.sigma_mat, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= 0.2);
    CHECK(eig.eigenvalues().maxCoeff() <= 3.0);

    const GroundTruth again = make_sigma(100, 5, 42);
    CHECK(again.sigma_mat == gt.sigma_mat);
    CHECK(make_sigma(100, 5, 43).sigma_mat != gt.sigma_mat);
}

TEST_CASE("single-entry precision column") {
    const GroundTruth gt = make_sigma(20, 1, 7);
    CHECK(gt.precision_col_support == std::vector<Index>{0});
    CHECK(gt.sigma_mat.col(0).tail(19).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THROWS_AS(make_sigma(2, 1, 1), InvalidInput);
    CHECK_THROWS_AS(make_sigma(10, 11, 1), InvalidInput);
}

TEST_CASE("signal construction") {
    const std::vector<Index> prec{0, 1, 2, 3, 4};
    const double lambda = 0.25;
    auto rows_of = [](const Matrix& b) {
        std::vector<Index> out;
        for (Index j = 0; j < b.rows(); ++j)
            if (b.row(j).norm() > 0.0) out.push_back(j);
        return out;
    };

    const Matrix none = make_bstar(50, 3, 8, lambda, OverlapMode::no_overlap, prec, 1);
    auto rows = rows_of(none);
    CHECK(rows.size() == 8);
    for (Index j : rows) {
        CHECK(j >= 5);
        CHECK((none.row(j).array() == lambda).all());
    }

    const Matrix over = make_bstar(50, 3, 8, lambda, OverlapMode::overlapping, prec, 1);
    rows = rows_of(over);
    CHECK(rows.size() == 8);
    for (Index j : prec) CHECK(std::find(rows.begin(), rows.end(), j) != rows.end());

    const Matrix inner = make_bstar(50, 3, 3, lambda, OverlapMode::overlapping, prec, 1);
    rows = rows_of(inner);
    CHECK(rows.size() == 3);
    for (Index j : rows) CHECK(j < 5);

    CHECK(rows_of(make_bstar(50, 3, 5, lambda, OverlapMode::overlapping, prec, 2)) == prec);
    CHECK(make_bstar(50, 3, 0, lambda, OverlapMode::no_overlap, prec, 2).isZero(0.0));
    CHECK_THROWS_AS(make_bstar(8, 3, 4, lambda, OverlapMode::no_overlap, prec, 2), InvalidInput);
}

TEST_CASE("sampling") {
    GroundTruth gt = make_sigma(5, 2, 3);
    gt.b_star = Matrix::Zero(5, 2);
    gt.b_star.row(1).setConstant(0.5);

    const ProblemData exact = sample_instance(gt, 50, 0.0, 9);
    CHECK((exact.y() - exact.x() * gt.b_star).cwiseAbs().maxCoeff() == 0.0);

    const ProblemData a = sample_instance(gt, 50, 1.0, 9);
    const ProblemData b = sample_instance(gt, 50, 1.0, 9);
    CHECK(a.x() == b.x());
    CHECK(a.y() == b.y());
    CHECK(a.x() == exact.x());

    const Index n = 5000;
    const ProblemData big = sample_instance(gt, n, 1.0, 10);
    const Matrix cov = big.x().transpose() * big.x() / static_cast<double>(n);
    CHECK((cov - gt.sigma_mat).cwiseAbs().maxCoeff() <= 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("goodness-of-fit helpers") {
    CHECK(ks_distance({0.5}, [](double x) { return x; }) == doctest::Approx(0.5));
    CHECK(ks_distance({0.25, 0.75}, [](double x) { return x; }) == doctest::Approx(0.25));
    const auto [lo, hi] = wilson_interval(95, 100);
    CHECK(lo == doctest::Approx(0.8883).epsilon(1e-3));
    CHECK(hi == doctest::Approx(0.9785).epsilon(1e-3));
    CHECK_THROWS_AS(wilson_interval(5, 0), InvalidInput);
}

TEST_CASE("config parsing") {
    const SimConfig cfg = config_from_json(
        R"({"schema_version": 1, "preset": "paper", "n_sim": 3, "overlap_mode": "overlapping", "variants": ["normal_unknown"]})",
        SimConfig{});
    CHECK(cfg.n == 2000);
    CHECK(cfg.n_sim == 3);
    CHECK(cfg.overlap_mode == OverlapMode::overlapping);
    CHECK(cfg.variants == std::set<PivotKind>{PivotKind::normal_unknown});
    CHECK_THROWS_AS(config_from_json(R"({"n": 3})", SimConfig{}), InvalidInput);
    CHECK_THROWS_AS(config_from_json(R"({"schema_version": 1, "nn": 3})", SimConfig{}), InvalidInput);
    CHECK_THROWS_AS(config_from_json(R"({"schema_version": 2})", SimConfig{}), InvalidInput);
    CHECK_THROWS_AS(config_from_json(R"({"schema_version": 1, "n": "x"})", SimConfig{}), InvalidInput);

    const SimConfig round = config_from_json(config_json(cfg), SimConfig{});
    CHECK(config_json(round) == config_json(cfg));
}

TEST_CASE("small campaign is deterministic and self-consistent") {
    SimConfig cfg;
    cfg.n = 60;
    cfg.p = 80;
    cfg.t = 3;
    cfg.s = 3;
    cfg.s_omega = 3;
    cfg.n_sim = 6;
    cfg.seed = 77;
    cfg.variants = {PivotKind::normal_known, PivotKind::chi_known, PivotKind::chi_sigma_hat,
                    PivotKind::normal_unknown, PivotKind::chi_unknown, PivotKind::chi_sigma_hat_unknown};
    cfg.compare_single_task = true;
    cfg.threads = 1;
    const SimResult one = run_monte_carlo(cfg);
    cfg.threads = 3;
    const SimResult three = run_monte_carlo(cfg);
    CHECK(replicates_csv(one.records) == replicates_csv(three.records));
    CHECK(summary_json(one) == summary_json(three));

    CHECK(one.summary.failures == 0);
    CHECK(one.summary.coverage_mismatches == 0);
    for (const char* key : {"normal_known", "hat_E", "check_E", "check_E_sigma_hat", "normal_unknown", "hat_E_j",
                            "hat_E_j_sigma_hat", "single_task"}) {
        CHECK(one.summary.coverage.count(key) == 1);
    }
    CHECK(one.summary.width.count == 6);

    const auto summary = nlohmann::json::parse(summary_json(one));
    CHECK(summary.at("schema_version") == kSchemaVersion);
    CHECK(summary.at("pivots").at("normal_known").at("qq").at("empirical").size() == 6);

    const GroundTruth gt = make_ground_truth(cfg);
    const ReplicateRecord rec = run_replicate(cfg, gt, 2);
    CHECK(rec.pivot_values == one.records[2].pivot_values);
}

TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.s = cfg.p;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = SimConfig{};
    cfg.t = cfg.n;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = SimConfig{};
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    CHECK_THROWS_AS(preset("laptop"), InvalidInput);
}
