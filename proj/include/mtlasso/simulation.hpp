#pragma once

#include "mtlasso/inference.hpp"
#include "mtlasso/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mtlasso {

enum class OverlapMode { overlapping, no_overlap };
std::string to_string(OverlapMode m);
OverlapMode parse_overlap_mode(const std::string& s);
PivotKind parse_pivot_kind(const std::string& s);

struct SimConfig {
    Index n = 400;
    Index p = 800;
    Index t = 5;
    Index s = 5;
    Index s_omega = 5;
    double sigma = 1.0;
    double alpha = 0.05;
    Index n_sim = 300;
    OverlapMode overlap_mode = OverlapMode::no_overlap;
    std::uint64_t seed = 1;
    std::set<PivotKind> variants = {PivotKind::normal_known, PivotKind::chi_known, PivotKind::chi_sigma_hat};
    bool compare_single_task = false;  // also fit the T = 1 Lasso on the first task
    Index task = 0;                    // task for the normal pivots and intervals
    Index nodewise_j = 0;              // row for the unknown-Sigma quantities
    TauChoice tau_choice = TauChoice::norm;
    int threads = 0;                   // 0: hardware concurrency

    void validate() const;
};

/// Named configurations: "desk" (n=400, p=800, T=5) and "paper" (n=2000, p=6000, T=10).
SimConfig preset(const std::string& name);

struct GroundTruth {
    Matrix sigma_mat;
    Matrix precision;    // Sigma^{-1}, known exactly from the construction
    Matrix sigma_chol;   // lower L with Sigma = L L^T
    CoefficientMatrix b_star;
    std::vector<Index> precision_col_support;  // supp(Sigma^{-1} e_1)
    double lambda = 0.0;
};

/// Covariance part of the ground truth:
///   Lambda = Q D Q^T with Q from the QR of a (p-1) x (p-1) Gaussian matrix and
///   D = diag(1 + j/(p-2)), Lambda~ = [[3/2, v^T], [v, Lambda]] with v having
///   s_omega - 1 equal entries of norm one in its leading positions, and
///   Sigma = Lambda~^{-1} / alpha where alpha is the largest diagonal entry of
///   Lambda~^{-1}. Fills sigma_mat, precision, sigma_chol, precision_col_support.
GroundTruth make_sigma(Index p, Index s_omega, std::uint64_t seed);

/// Entries of Sigma^{-1} e_1 below this in absolute value count as zero.
inline constexpr double kPrecisionSupportThreshold = 1e-9;

/// s rows filled with lambda. no_overlap draws the support uniformly from the
/// complement of precision_support; overlapping nests one support in the other.
CoefficientMatrix make_bstar(Index p, Index t, Index s, double lambda, OverlapMode mode,
                             const std::vector<Index>& precision_support, std::uint64_t seed);

/// X = G L^T, Y = X B* + sigma E. The design and noise use separate streams
/// derived from seed.
ProblemData sample_instance(const GroundTruth& gt, Index n, double sigma, std::uint64_t seed);

/// Ground truth for a configuration: Sigma, the penalty and B*.
GroundTruth make_ground_truth(const SimConfig& cfg);

struct ReplicateRecord {
    Index replicate = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string failure;
    std::map<std::string, double> pivot_values;
    std::map<std::string, bool> covered;
    std::map<std::string, double> widths;
    double sigma_hat = 0.0;
    Index support_size = 0;
    // Regions whose membership test disagreed with statistic <= q.
    int coverage_mismatches = 0;
};

/// One replicate; errors are captured in the record.
ReplicateRecord run_replicate(const SimConfig& cfg, const GroundTruth& gt, Index replicate);

struct CoverageSummary {
    Index count = 0;
    double rate = 0.0;
    double wilson_lower = 0.0;
    double wilson_upper = 0.0;
};

struct PivotSummary {
    std::string law;  // "normal" or "chi_T"
    Index count = 0;
    double mean = 0.0;
    double sd = 0.0;
    double ks = 0.0;
    std::vector<std::pair<double, double>> qq;  // (theoretical, empirical), ascending
};

struct WidthSummary {
    Index count = 0;
    double mean_relative_change = 0.0;
    double sd_relative_change = 0.0;
    double mean_multi = 0.0;
    double mean_single = 0.0;
    double fraction_multi_shorter = 0.0;
};

struct SimSummary {
    Index requested = 0;
    Index failures = 0;
    std::vector<std::string> failure_reasons;
    int coverage_mismatches = 0;
    double lambda = 0.0;
    double mean_support_size = 0.0;
    std::map<std::string, PivotSummary> pivots;
    std::map<std::string, CoverageSummary> coverage;
    WidthSummary width;
};

struct SimResult {
    SimConfig config;
    std::vector<ReplicateRecord> records;  // by replicate index
    SimSummary summary;
};

/// Runs every replicate on a pool of cfg.threads workers and aggregates in
/// replicate order, so the result does not depend on the thread count.
/// Throws NumericError when more than 5% of the replicates fail.
SimResult run_monte_carlo(const SimConfig& cfg);

/// Aggregates successful records.
SimSummary summarize(const SimConfig& cfg, const std::vector<ReplicateRecord>& records, double lambda);

/// sup_x |F_n(x) - F(x)|
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Wilson score interval at the normal quantile z.
std::pair<double, double> wilson_interval(Index successes, Index trials, double z = 1.959963984540054);

std::string replicates_csv(const std::vector<ReplicateRecord>& records);
std::string summary_json(const SimResult& result);
std::string config_json(const SimConfig& cfg);
/// Applies the fields present in a JSON config (with schema_version) on top of base.
SimConfig config_from_json(const std::string& text, SimConfig base);

inline constexpr int kSchemaVersion = 1;

}  // namespace mtlasso
