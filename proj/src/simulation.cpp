#include "mtlasso/simulation.hpp"

#include "mtlasso/core.hpp"
#include "mtlasso/group_lasso.hpp"
#include "mtlasso/interaction.hpp"
#include "mtlasso/matrix_io.hpp"
#include "mtlasso/nodewise.hpp"
#include "mtlasso/rng.hpp"
#include "mtlasso/special.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace mtlasso {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTruthReplicate = ~std::uint64_t{0};
constexpr double kMaxFailureFraction = 0.05;

bool is_normal_kind(PivotKind k) { return k == PivotKind::normal_known || k == PivotKind::normal_unknown; }

bool needs_nodewise(const SimConfig& cfg) {
    for (PivotKind k : {PivotKind::normal_unknown, PivotKind::chi_unknown, PivotKind::chi_sigma_hat_unknown}) {
        if (cfg.variants.count(k)) return true;
    }
    return false;
}

bool needs_chi(const SimConfig& cfg) {
    for (PivotKind k : cfg.variants) {
        if (!is_normal_kind(k)) return true;
    }
    return false;
}

}  // namespace

std::string to_string(OverlapMode m) { return m == OverlapMode::overlapping ? "overlapping" : "no_overlap"; }

OverlapMode parse_overlap_mode(const std::string& s) {
    if (s == "overlapping") return OverlapMode::overlapping;
    if (s == "no_overlap") return OverlapMode::no_overlap;
    throw InvalidInput("unknown overlap mode '" + s + "' (expected overlapping or no_overlap)");
}

PivotKind parse_pivot_kind(const std::string& s) {
    for (PivotKind k : {PivotKind::normal_known, PivotKind::normal_unknown, PivotKind::chi_known,
                        PivotKind::chi_unknown, PivotKind::chi_sigma_hat, PivotKind::chi_sigma_hat_unknown}) {
        if (to_string(k) == s) return k;
    }
    throw InvalidInput("unknown pivot kind '" + s + "'");
}

void SimConfig::validate() const {
    if (n < 2) throw InvalidInput("simulation: n must be at least 2");
    if (p < 3) throw InvalidInput("simulation: p must be at least 3");
    if (t < 1) throw InvalidInput("simulation: T must be positive");
    if (s < 0 || s >= p) throw InvalidInput("simulation: need 0 <= s < p");
    if (s_omega < 1 || s_omega >= p) throw InvalidInput("simulation: need 1 <= s_omega < p");
    if (overlap_mode == OverlapMode::no_overlap && s > p - s_omega) {
        throw InvalidInput("simulation: no_overlap needs s <= p - s_omega");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("simulation: sigma must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("simulation: alpha must lie in (0, 1)");
    if (n_sim < 1) throw InvalidInput("simulation: n_sim must be positive");
    if (task < 0 || task >= t) throw InvalidInput("simulation: task index out of range");
    if (nodewise_j < 0 || nodewise_j >= p) throw InvalidInput("simulation: nodewise_j out of range");
    if (threads < 0) throw InvalidInput("simulation: threads must be nonnegative");
    if (variants.empty() && !compare_single_task) throw InvalidInput("simulation: nothing to collect");
    if (needs_chi(*this) && t >= n) throw InvalidInput("simulation: chi-square variants need T < n");
}

SimConfig preset(const std::string& name) {
    SimConfig cfg;
    if (name == "desk") return cfg;
    if (name == "paper") {
        cfg.n = 2000;
        cfg.p = 6000;
        cfg.t = 10;
        cfg.n_sim = 128;
        cfg.variants = {PivotKind::normal_known,  PivotKind::normal_unknown, PivotKind::chi_known,
                        PivotKind::chi_unknown,   PivotKind::chi_sigma_hat,  PivotKind::chi_sigma_hat_unknown};
        cfg.compare_single_task = true;
        return cfg;
    }
    throw InvalidInput("unknown preset '" + name + "' (expected desk or paper)");
}

// ---------------------------------------------------------------------------

GroundTruth make_sigma(Index p, Index s_omega, std::uint64_t seed) {
    if (p < 3) throw InvalidInput("make_sigma: p must be at least 3");
    if (s_omega < 1 || s_omega > p) throw InvalidInput("make_sigma: need 1 <= s_omega <= p");
    const Index m = p - 1;

    Rng rng(seed);
    const Matrix gauss = rng.normal_matrix(m, m);
    Eigen::HouseholderQR<Matrix> qr(gauss);
    Matrix q = qr.householderQ();
    const Vector r_diag = qr.matrixQR().diagonal();
    for (Index i = 0; i < m; ++i) {
        if (r_diag(i) < 0.0) q.col(i) = -q.col(i);
    }
    Vector d(m);
    for (Index j = 0; j < m; ++j) d(j) = 1.0 + static_cast<double>(j) / static_cast<double>(p - 2);

    Matrix tilde(p, p);
    tilde(0, 0) = 1.5;
    Matrix lam = q * d.asDiagonal() * q.transpose();
    tilde.bottomRightCorner(m, m) = 0.5 * (lam + lam.transpose());
    Vector v = Vector::Zero(m);
    if (s_omega > 1) v.head(s_omega - 1).setConstant(1.0 / std::sqrt(static_cast<double>(s_omega - 1)));
    tilde.block(1, 0, m, 1) = v;
    tilde.block(0, 1, 1, m) = v.transpose();

    Eigen::LLT<Matrix> tilde_llt(tilde);
    if (tilde_llt.info() != Eigen::Success) throw NumericError("make_sigma: Lambda~ is not positive definite");
    Matrix inv = tilde_llt.solve(Matrix::Identity(p, p));
    inv = (0.5 * (inv + inv.transpose())).eval();
    const double alpha = inv.diagonal().maxCoeff();

    GroundTruth gt;
    gt.sigma_mat = inv / alpha;
    gt.precision = alpha * tilde;
    Eigen::LLT<Matrix> llt(gt.sigma_mat);
    if (llt.info() != Eigen::Success) throw NumericError("make_sigma: Cholesky of Sigma failed");
    gt.sigma_chol = llt.matrixL();
    for (Index i = 0; i < p; ++i) {
        if (std::abs(gt.precision(i, 0)) > kPrecisionSupportThreshold) gt.precision_col_support.push_back(i);
    }
    return gt;
}

CoefficientMatrix make_bstar(Index p, Index t, Index s, double lambda, OverlapMode mode,
                             const std::vector<Index>& precision_support, std::uint64_t seed) {
    if (s < 0 || s > p) throw InvalidInput("make_bstar: need 0 <= s <= p");
    if (t < 1) throw InvalidInput("make_bstar: T must be positive");
    for (Index j : precision_support) {
        if (j < 0 || j >= p) throw InvalidInput("make_bstar: precision support index out of range");
    }
    std::vector<bool> in_precision(static_cast<std::size_t>(p), false);
    for (Index j : precision_support) in_precision[static_cast<std::size_t>(j)] = true;
    std::vector<Index> complement;
    for (Index j = 0; j < p; ++j) {
        if (!in_precision[static_cast<std::size_t>(j)]) complement.push_back(j);
    }
    std::vector<Index> nested(precision_support);
    std::sort(nested.begin(), nested.end());
    nested.erase(std::unique(nested.begin(), nested.end()), nested.end());

    Rng rng(seed);
    std::vector<Index> rows;
    if (mode == OverlapMode::no_overlap) {
        if (s > static_cast<Index>(complement.size())) {
            throw InvalidInput("make_bstar: no_overlap needs s <= p - |supp(Sigma^{-1} e_1)|");
        }
        std::shuffle(complement.begin(), complement.end(), rng.engine());
        rows.assign(complement.begin(), complement.begin() + s);
    } else if (s >= static_cast<Index>(nested.size())) {
        rows = nested;
        std::shuffle(complement.begin(), complement.end(), rng.engine());
        rows.insert(rows.end(), complement.begin(), complement.begin() + (s - static_cast<Index>(nested.size())));
    } else {
        std::shuffle(nested.begin(), nested.end(), rng.engine());
        rows.assign(nested.begin(), nested.begin() + s);
    }

    CoefficientMatrix b = CoefficientMatrix::Zero(p, t);
    for (Index j : rows) b.row(j).setConstant(lambda);
    return b;
}

ProblemData sample_instance(const GroundTruth& gt, Index n, double sigma, std::uint64_t seed) {
    const Index p = gt.sigma_chol.rows();
    if (n < 1) throw InvalidInput("sample_instance: n must be positive");
    if (p == 0 || gt.b_star.rows() != p) throw InvalidInput("sample_instance: ground truth is incomplete");
    if (!(sigma >= 0.0)) throw InvalidInput("sample_instance: sigma must be nonnegative");
    Rng design(child_seed(seed, 0, kStreamDesign));
    Rng noise(child_seed(seed, 0, kStreamNoise));
    const Matrix g = design.normal_matrix(n, p);
    Matrix x = g * gt.sigma_chol.transpose().triangularView<Eigen::Upper>();
    Matrix y = x * gt.b_star;
    if (sigma > 0.0) y += sigma * noise.normal_matrix(n, gt.b_star.cols());
    return ProblemData(std::move(x), std::move(y));
}

GroundTruth make_ground_truth(const SimConfig& cfg) {
    cfg.validate();
    GroundTruth gt = make_sigma(cfg.p, cfg.s_omega, child_seed(cfg.seed, kTruthReplicate, kStreamCovariance));
    // max diag(Sigma) = 1 by construction.
    gt.lambda = default_lambda(cfg.n, cfg.p, cfg.t, std::max<Index>(cfg.s, 1), cfg.sigma, 1.0);
    gt.b_star = make_bstar(cfg.p, cfg.t, cfg.s, gt.lambda, cfg.overlap_mode, gt.precision_col_support,
                           child_seed(cfg.seed, kTruthReplicate, kStreamSupport));
    return gt;
}

// ---------------------------------------------------------------------------

namespace {

void record_region(ReplicateRecord& rec, const std::string& key, double statistic, const EllipsoidRegion& region,
                   const Vector& truth) {
    const bool by_pivot = statistic <= region.q;
    const bool by_region = region.contains(truth);
    rec.pivot_values[key] = statistic;
    rec.covered[key] = by_region;
    rec.widths[key] = 2.0 * ellipsoid_radius(region);
    if (by_pivot != by_region) ++rec.coverage_mismatches;
}

void record_interval(ReplicateRecord& rec, const std::string& key, double pivot, const NormalInterval& ci,
                     double truth) {
    const bool by_pivot = std::abs(pivot) <= chi_quantile(1, ci.alpha);
    const bool by_interval = ci.contains(truth);
    rec.pivot_values[key] = pivot;
    rec.covered[key] = by_interval;
    rec.widths[key] = ci.length();
    if (by_pivot != by_interval) ++rec.coverage_mismatches;
}

}  // namespace

ReplicateRecord run_replicate(const SimConfig& cfg, const GroundTruth& gt, Index replicate) {
    ReplicateRecord rec;
    rec.replicate = replicate;
    rec.seed = child_seed(cfg.seed, static_cast<std::uint64_t>(replicate), 0);
    try {
        const ProblemData data = sample_instance(gt, cfg.n, cfg.sigma, rec.seed);
        const LassoFit fit = fit_multitask_lasso(data, gt.lambda);
        InteractionMatrix a_hat = interaction_fast(data.x(), fit.b_hat, gt.lambda, fit.support);
        const DebiasedFit df(data, fit.b_hat, std::move(a_hat));
        rec.sigma_hat = df.sigma_hat();
        rec.support_size = static_cast<Index>(fit.support.size());

        const Vector b = Vector::Unit(cfg.t, cfg.task);
        const auto& v = cfg.variants;
        const bool known = v.count(PivotKind::normal_known) || v.count(PivotKind::chi_known) ||
                           v.count(PivotKind::chi_sigma_hat) || cfg.compare_single_task;
        if (known) {
            const KnownDirection dir = normalize_direction_with_precision(Vector::Unit(cfg.p, 0), gt.precision, data.x());
            const Vector theta = gt.b_star.transpose() * dir.a;
            const NormalInterval ci = ci_known_sigma(df, dir, cfg.task, cfg.alpha);
            if (v.count(PivotKind::normal_known)) {
                const double pivot = normal_pivot_known_sigma(df, dir, b, gt.b_star).value;
                record_interval(rec, "normal_known", pivot, ci, theta(cfg.task));
            }
            if (v.count(PivotKind::chi_known)) {
                for (EllipsoidVariant ev : {EllipsoidVariant::hat_E, EllipsoidVariant::check_E}) {
                    record_region(rec, to_string(ev), known_sigma_statistic(df, dir, theta, ev),
                                  ellipsoid_known_sigma(df, dir, cfg.alpha, ev), theta);
                }
            }
            if (v.count(PivotKind::chi_sigma_hat)) {
                record_region(rec, "check_E_sigma_hat",
                              known_sigma_statistic(df, dir, theta, EllipsoidVariant::check_E_sigma_hat),
                              ellipsoid_sigma_hat(df, dir, cfg.alpha), theta);
            }
            if (cfg.compare_single_task) {
                const ProblemData single = data.task(cfg.task);
                const double lambda1 = default_lambda(cfg.n, cfg.p, 1, std::max<Index>(cfg.s, 1), cfg.sigma, 1.0);
                const LassoFit fit1 = fit_multitask_lasso(single, lambda1);
                const NormalInterval ci1 = single_task_interval(single, fit1.b_hat,
                                                                static_cast<Index>(fit1.support.size()), dir, cfg.alpha);
                rec.covered["single_task"] = ci1.contains(theta(cfg.task));
                rec.widths["single_task"] = ci1.length();
                rec.widths["multi_task"] = ci.length();
                rec.widths["relative_change"] = width_comparison(ci, ci1).relative_change;
            }
        }

        if (needs_nodewise(cfg)) {
            const NodewiseFit nw = fit_nodewise(data.x(), cfg.nodewise_j);
            const Vector theta = gt.b_star.row(cfg.nodewise_j).transpose();
            std::optional<double> true_tau;
            if (cfg.tau_choice == TauChoice::true_tau) {
                true_tau = 1.0 / std::sqrt(gt.precision(cfg.nodewise_j, cfg.nodewise_j));
            }
            if (v.count(PivotKind::normal_unknown)) {
                const double pivot =
                    normal_pivot_unknown_sigma(df, nw, b, gt.b_star, cfg.tau_choice, true_tau).value;
                const NormalInterval ci = ci_unknown_sigma(df, nw, cfg.task, cfg.alpha, cfg.tau_choice, true_tau);
                record_interval(rec, "normal_unknown", pivot, ci, theta(cfg.task));
            }
            if (v.count(PivotKind::chi_unknown)) {
                record_region(rec, "hat_E_j", unknown_sigma_statistic(df, nw, theta, EllipsoidVariant::hat_E_j),
                              ellipsoid_unknown_sigma(df, nw, cfg.alpha, EllipsoidScale::gamma_hat_matrix), theta);
            }
            if (v.count(PivotKind::chi_sigma_hat_unknown)) {
                record_region(rec, "hat_E_j_sigma_hat",
                              unknown_sigma_statistic(df, nw, theta, EllipsoidVariant::hat_E_j_sigma_hat),
                              ellipsoid_unknown_sigma(df, nw, cfg.alpha, EllipsoidScale::sigma_hat), theta);
            }
        }
        rec.ok = true;
    } catch (const Error& e) {
        rec.ok = false;
        rec.failure = e.what();
        rec.pivot_values.clear();
        rec.covered.clear();
        rec.widths.clear();
    }
    return rec;
}

// ---------------------------------------------------------------------------

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InvalidInput("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

std::pair<double, double> wilson_interval(Index successes, Index trials, double z) {
    if (trials <= 0 || successes < 0 || successes > trials) throw InvalidInput("wilson_interval: bad counts");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

SimSummary summarize(const SimConfig& cfg, const std::vector<ReplicateRecord>& records, double lambda) {
    SimSummary sum;
    sum.requested = static_cast<Index>(records.size());
    sum.lambda = lambda;
    std::map<std::string, std::vector<double>> pivots;
    std::map<std::string, std::pair<Index, Index>> hits;
    std::vector<double> rel;
    double multi = 0.0, single = 0.0, support = 0.0;
    Index shorter = 0, ok = 0;
    for (const auto& r : records) {
        if (!r.ok) {
            ++sum.failures;
            sum.failure_reasons.push_back("replicate " + std::to_string(r.replicate) + ": " + r.failure);
            continue;
        }
        ++ok;
        support += static_cast<double>(r.support_size);
        sum.coverage_mismatches += r.coverage_mismatches;
        for (const auto& [k, val] : r.pivot_values) pivots[k].push_back(val);
        for (const auto& [k, c] : r.covered) {
            hits[k].first += c ? 1 : 0;
            hits[k].second += 1;
        }
        if (auto it = r.widths.find("relative_change"); it != r.widths.end()) {
            rel.push_back(it->second);
            multi += r.widths.at("multi_task");
            single += r.widths.at("single_task");
            shorter += it->second < 0.0 ? 1 : 0;
        }
    }
    if (ok > 0) sum.mean_support_size = support / static_cast<double>(ok);

    const int dof = static_cast<int>(cfg.t);
    for (auto& [key, values] : pivots) {
        PivotSummary ps;
        const bool normal = key == "normal_known" || key == "normal_unknown";
        ps.law = normal ? "normal" : "chi_T";
        ps.count = static_cast<Index>(values.size());
        const double n = static_cast<double>(values.size());
        ps.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : values) ss += (x - ps.mean) * (x - ps.mean);
        ps.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        if (normal) {
            ps.ks = ks_distance(values, [](double x) { return normal_cdf(x); });
        } else {
            ps.ks = ks_distance(values, [dof](double x) { return chi_cdf(x, dof); });
        }
        std::sort(values.begin(), values.end());
        ps.qq.reserve(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double prob = (static_cast<double>(i) + 0.5) / n;
            const double theo = normal ? normal_quantile(prob) : chi_quantile(dof, 1.0 - prob);
            ps.qq.emplace_back(theo, values[i]);
        }
        sum.pivots[key] = std::move(ps);
    }
    const double z = chi_quantile(1, 0.05);
    for (const auto& [key, h] : hits) {
        CoverageSummary cs;
        cs.count = h.second;
        cs.rate = static_cast<double>(h.first) / static_cast<double>(h.second);
        std::tie(cs.wilson_lower, cs.wilson_upper) = wilson_interval(h.first, h.second, z);
        sum.coverage[key] = cs;
    }
    if (!rel.empty()) {
        const double n = static_cast<double>(rel.size());
        WidthSummary& w = sum.width;
        w.count = static_cast<Index>(rel.size());
        w.mean_relative_change = std::accumulate(rel.begin(), rel.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : rel) ss += (x - w.mean_relative_change) * (x - w.mean_relative_change);
        w.sd_relative_change = rel.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        w.mean_multi = multi / n;
        w.mean_single = single / n;
        w.fraction_multi_shorter = static_cast<double>(shorter) / n;
    }
    return sum;
}

SimResult run_monte_carlo(const SimConfig& cfg) {
    cfg.validate();
    const GroundTruth gt = make_ground_truth(cfg);

    SimResult result;
    result.config = cfg;
    result.records.resize(static_cast<std::size_t>(cfg.n_sim));

    unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cfg.n_sim)));

    std::atomic<Index> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto work = [&]() {
        for (;;) {
            const Index r = next.fetch_add(1);
            if (r >= cfg.n_sim) return;
            try {
                result.records[static_cast<std::size_t>(r)] = run_replicate(cfg, gt, r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next.store(cfg.n_sim);
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    result.summary = summarize(cfg, result.records, gt.lambda);
    if (static_cast<double>(result.summary.failures) > kMaxFailureFraction * static_cast<double>(cfg.n_sim)) {
        std::ostringstream msg;
        msg << "simulation: " << result.summary.failures << " of " << cfg.n_sim << " replicates failed";
        if (!result.summary.failure_reasons.empty()) msg << "; first: " << result.summary.failure_reasons.front();
        throw NumericError(msg.str());
    }
    return result;
}

// ---------------------------------------------------------------------------

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string replicates_csv(const std::vector<ReplicateRecord>& records) {
    std::set<std::string> pivot_keys, covered_keys, width_keys;
    for (const auto& r : records) {
        for (const auto& kv : r.pivot_values) pivot_keys.insert(kv.first);
        for (const auto& kv : r.covered) covered_keys.insert(kv.first);
        for (const auto& kv : r.widths) width_keys.insert(kv.first);
    }
    std::ostringstream out;
    out << "replicate,seed,ok,sigma_hat,support_size";
    for (const auto& k : pivot_keys) out << ",pivot_" << k;
    for (const auto& k : covered_keys) out << ",covered_" << k;
    for (const auto& k : width_keys) out << ",width_" << k;
    out << ",failure\n";
    for (const auto& r : records) {
        out << r.replicate << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',';
        if (r.ok) out << io::format_double(r.sigma_hat) << ',' << r.support_size;
        else out << ',';
        for (const auto& k : pivot_keys) {
            out << ',';
            if (auto it = r.pivot_values.find(k); it != r.pivot_values.end()) out << io::format_double(it->second);
        }
        for (const auto& k : covered_keys) {
            out << ',';
            if (auto it = r.covered.find(k); it != r.covered.end()) out << (it->second ? 1 : 0);
        }
        for (const auto& k : width_keys) {
            out << ',';
            if (auto it = r.widths.find(k); it != r.widths.end()) out << io::format_double(it->second);
        }
        out << ',' << csv_quote(r.failure) << '\n';
    }
    return out.str();
}

namespace {

json config_to_json_value(const SimConfig& cfg) {
    json variants = json::array();
    for (PivotKind k : cfg.variants) variants.push_back(to_string(k));
    return json{{"schema_version", kSchemaVersion},
                {"n", cfg.n},
                {"p", cfg.p},
                {"t", cfg.t},
                {"s", cfg.s},
                {"s_omega", cfg.s_omega},
                {"sigma", cfg.sigma},
                {"alpha", cfg.alpha},
                {"n_sim", cfg.n_sim},
                {"overlap_mode", to_string(cfg.overlap_mode)},
                {"seed", cfg.seed},
                {"variants", variants},
                {"compare_single_task", cfg.compare_single_task},
                {"task", cfg.task},
                {"nodewise_j", cfg.nodewise_j},
                {"tau_choice", to_string(cfg.tau_choice)},
                {"threads", cfg.threads}};
}

TauChoice parse_tau_choice(const std::string& s) {
    for (TauChoice c : {TauChoice::true_tau, TauChoice::inner, TauChoice::norm}) {
        if (to_string(c) == s) return c;
    }
    throw InvalidInput("unknown tau choice '" + s + "'");
}

}  // namespace

std::string config_json(const SimConfig& cfg) { return config_to_json_value(cfg).dump(2) + "\n"; }

SimConfig config_from_json(const std::string& text, SimConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidInput("config: top level must be an object");
    if (!j.contains("schema_version")) throw InvalidInput("config: missing schema_version");
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw InvalidInput("config: unsupported schema_version " + j.at("schema_version").dump());
        }
        if (j.contains("preset")) base = preset(j.at("preset").get<std::string>());
        for (const auto& [key, val] : j.items()) {
            if (key == "schema_version" || key == "preset") continue;
            if (key == "n") base.n = val.get<Index>();
            else if (key == "p") base.p = val.get<Index>();
            else if (key == "t") base.t = val.get<Index>();
            else if (key == "s") base.s = val.get<Index>();
            else if (key == "s_omega") base.s_omega = val.get<Index>();
            else if (key == "sigma") base.sigma = val.get<double>();
            else if (key == "alpha") base.alpha = val.get<double>();
            else if (key == "n_sim") base.n_sim = val.get<Index>();
            else if (key == "overlap_mode") base.overlap_mode = parse_overlap_mode(val.get<std::string>());
            else if (key == "seed") base.seed = val.get<std::uint64_t>();
            else if (key == "variants") {
                base.variants.clear();
                for (const auto& s : val) base.variants.insert(parse_pivot_kind(s.get<std::string>()));
            } else if (key == "compare_single_task") base.compare_single_task = val.get<bool>();
            else if (key == "task") base.task = val.get<Index>();
            else if (key == "nodewise_j") base.nodewise_j = val.get<Index>();
            else if (key == "tau_choice") base.tau_choice = parse_tau_choice(val.get<std::string>());
            else if (key == "threads") base.threads = val.get<int>();
            else throw InvalidInput("config: unknown field '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config: wrong field type: ") + e.what());
    }
    return base;
}

std::string summary_json(const SimResult& result) {
    const SimSummary& s = result.summary;
    json out;
    out["schema_version"] = kSchemaVersion;
    json cfg = config_to_json_value(result.config);
    cfg.erase("threads");  // not part of the result
    cfg.erase("schema_version");
    out["config"] = cfg;
    out["lambda"] = s.lambda;
    out["requested"] = s.requested;
    out["failures"] = s.failures;
    out["failure_reasons"] = s.failure_reasons;
    out["coverage_mismatches"] = s.coverage_mismatches;
    out["mean_support_size"] = s.mean_support_size;
    json coverage = json::object();
    for (const auto& [k, c] : s.coverage) {
        coverage[k] = {{"count", c.count}, {"rate", c.rate}, {"wilson_lower", c.wilson_lower},
                       {"wilson_upper", c.wilson_upper}};
    }
    out["coverage"] = coverage;
    json pivots = json::object();
    for (const auto& [k, p] : s.pivots) {
        json theo = json::array(), emp = json::array();
        for (const auto& [a, b] : p.qq) {
            theo.push_back(a);
            emp.push_back(b);
        }
        pivots[k] = {{"law", p.law}, {"count", p.count}, {"mean", p.mean}, {"sd", p.sd}, {"ks", p.ks},
                     {"qq", {{"theoretical", theo}, {"empirical", emp}}}};
    }
    out["pivots"] = pivots;
    if (s.width.count > 0) {
        out["width"] = {{"count", s.width.count},
                        {"mean_relative_change", s.width.mean_relative_change},
                        {"sd_relative_change", s.width.sd_relative_change},
                        {"mean_multi_task", s.width.mean_multi},
                        {"mean_single_task", s.width.mean_single},
                        {"fraction_multi_shorter", s.width.fraction_multi_shorter}};
    }
    return out.dump(2) + "\n";
}

}  // namespace mtlasso
