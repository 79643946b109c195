#include "mtlasso/cli.hpp"

#include "mtlasso/core.hpp"
#include "mtlasso/group_lasso.hpp"
#include "mtlasso/inference.hpp"
#include "mtlasso/interaction.hpp"
#include "mtlasso/matrix_io.hpp"
#include "mtlasso/nodewise.hpp"
#include "mtlasso/simulation.hpp"
#include "mtlasso/special.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace mtlasso::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string x, y, bhat, sigma_file, direction, config, preset, variant, tau = "norm", method = "woodbury";
    std::string lambda = "auto";
    std::string out = ".";
    std::string format = "csv";
    double alpha = 0.05;
    Index task = 0;
    Index s = 1;
    std::optional<Index> j;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool check = false;
};

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw InvalidInput(what + ": cannot parse '" + text + "' as a number");
    }
    return v;
}

std::string matrix_ext(const Options& o) { return o.format == "json" ? ".json" : ".csv"; }

void write_json(const fs::path& path, const json& j) { io::write_text_atomic(path, j.dump(2) + "\n"); }

json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

ProblemData load_data(const Options& o) {
    if (o.x.empty() || o.y.empty()) throw InvalidInput("--x and --y are required");
    Matrix x = io::read_matrix(o.x);
    Matrix y = io::read_matrix(o.y);
    return ProblemData(std::move(x), std::move(y));
}

struct Penalty {
    double lambda = 0.0;
    std::string mode;
    std::optional<double> pilot_sigma;
    double sigma_jj_max = 0.0;
};

// For "auto": the noise level is unknown, so a pilot fit at the penalty
// computed from sigma0 = ||Y||_F / sqrt(nT) (an overestimate) supplies
// sigma_hat = ||Y - X B||_F / sqrt(nT), and the penalty is recomputed from it.
Penalty resolve_lambda(const ProblemData& data, const Options& o) {
    Penalty pen;
    const double n = static_cast<double>(data.n());
    pen.sigma_jj_max = data.x().colwise().squaredNorm().maxCoeff() / n;
    if (o.lambda != "auto") {
        pen.lambda = parse_double(o.lambda, "--lambda");
        if (pen.lambda < 0.0) throw InvalidInput("--lambda must be nonnegative");
        pen.mode = "explicit";
        return pen;
    }
    if (!(pen.sigma_jj_max > 0.0)) throw InvalidInput("--lambda auto: X is identically zero");
    const double nt = n * static_cast<double>(data.tasks());
    const double sigma0 = data.y().norm() / std::sqrt(nt);
    if (!(sigma0 > 0.0)) throw InvalidInput("--lambda auto: Y is identically zero");
    const double lambda0 = default_lambda(data.n(), data.p(), data.tasks(), o.s, sigma0, pen.sigma_jj_max);
    const LassoFit pilot = fit_multitask_lasso(data, lambda0);
    const double sigma1 = sigma_hat(data, pilot.b_hat);
    if (!(sigma1 > 0.0)) throw NumericError("--lambda auto: the pilot fit interpolates the data (sigma_hat = 0)");
    pen.pilot_sigma = sigma1;
    pen.lambda = default_lambda(data.n(), data.p(), data.tasks(), o.s, sigma1, pen.sigma_jj_max);
    pen.mode = "auto";
    return pen;
}

struct Estimate {
    CoefficientMatrix b_hat;
    std::vector<Index> support;
    std::optional<LassoFit> fit;
};

Estimate estimate(const ProblemData& data, const Options& o, double lambda) {
    Estimate e;
    if (!o.bhat.empty()) {
        e.b_hat = io::read_matrix(o.bhat);
        if (e.b_hat.rows() != data.p() || e.b_hat.cols() != data.tasks()) {
            throw InvalidInput("--bhat must be p x T");
        }
        e.support = support(e.b_hat, SolverOptions{}.support_tol);
        return e;
    }
    e.fit = fit_multitask_lasso(data, lambda);
    e.b_hat = e.fit->b_hat;
    e.support = e.fit->support;
    return e;
}

json penalty_json(const Penalty& pen) {
    json j{{"lambda", pen.lambda}, {"lambda_text", io::format_double(pen.lambda)}, {"lambda_mode", pen.mode},
           {"sigma_jj_max", pen.sigma_jj_max}};
    if (pen.pilot_sigma) j["pilot_sigma_hat"] = *pen.pilot_sigma;
    return j;
}

// --direction is a file holding a length-p vector, or "e:<k>" for the k-th
// canonical basis vector (0-based).
Vector load_direction(const Options& o, Index p) {
    if (o.direction.empty()) throw InvalidInput("--direction is required for known-Sigma inference");
    if (o.direction.rfind("e:", 0) == 0) {
        const double k = parse_double(o.direction.substr(2), "--direction");
        if (k != std::floor(k) || k < 0 || k >= static_cast<double>(p)) {
            throw InvalidInput("--direction: index out of range");
        }
        return Vector::Unit(p, static_cast<Index>(k));
    }
    Matrix m = io::read_matrix(o.direction);
    if (m.cols() == 1 && m.rows() == p) return m.col(0);
    if (m.rows() == 1 && m.cols() == p) return m.row(0).transpose();
    throw InvalidInput("--direction must hold a vector of length p");
}

KnownDirection known_direction(const Options& o, const ProblemData& data) {
    if (o.sigma_file.empty()) throw InvalidInput("--sigma-file is required for known-Sigma inference");
    const Matrix sigma = io::read_matrix(o.sigma_file);
    if (sigma.rows() != data.p() || sigma.cols() != data.p()) throw InvalidInput("--sigma-file must be p x p");
    return normalize_direction(load_direction(o, data.p()), sigma, data.x());
}

Index require_j(const Options& o, Index p) {
    if (!o.j) throw InvalidInput("--j is required");
    if (*o.j < 0 || *o.j >= p) throw InvalidInput("--j out of range");
    return *o.j;
}

TauChoice parse_tau(const std::string& s) {
    if (s == "inner") return TauChoice::inner;
    if (s == "norm") return TauChoice::norm;
    throw InvalidInput("--tau must be inner or norm");
}

EllipsoidVariant parse_ellipsoid(const std::string& s) {
    for (EllipsoidVariant v : {EllipsoidVariant::hat_E, EllipsoidVariant::check_E, EllipsoidVariant::check_E_sigma_hat,
                               EllipsoidVariant::hat_E_j, EllipsoidVariant::hat_E_j_sigma_hat}) {
        if (to_string(v) == s) return v;
    }
    throw InvalidInput("--variant: unknown region '" + s + "'");
}

bool is_unknown_sigma(EllipsoidVariant v) {
    return v == EllipsoidVariant::hat_E_j || v == EllipsoidVariant::hat_E_j_sigma_hat;
}

fs::path prepare_out(const Options& o) {
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

DebiasedFit debias(const ProblemData& data, const Estimate& est, double lambda) {
    InteractionMatrix a_hat = interaction_fast(data.x(), est.b_hat, lambda, est.support);
    return DebiasedFit(data, est.b_hat, std::move(a_hat));
}

// ---------------------------------------------------------------------------

int run_fit(const Options& o, std::ostream& out) {
    const ProblemData data = load_data(o);
    const Penalty pen = resolve_lambda(data, o);
    const LassoFit fit = fit_multitask_lasso(data, pen.lambda);
    const fs::path dir = prepare_out(o);
    io::write_matrix(dir / ("b_hat" + matrix_ext(o)), fit.b_hat);
    json report = penalty_json(pen);
    report["schema_version"] = kSchemaVersion;
    report["n"] = data.n();
    report["p"] = data.p();
    report["tasks"] = data.tasks();
    report["support"] = fit.support;
    report["support_size"] = fit.support.size();
    report["iterations"] = fit.iterations_used;
    report["kkt_residual"] = fit.kkt_residual;
    report["objective"] = fit.objective;
    report["sigma_hat"] = sigma_hat(data, fit.b_hat);
    report["degenerate_columns"] = fit.degenerate_columns;
    write_json(dir / "fit_report.json", report);
    out << "lambda " << io::format_double(pen.lambda) << ", |S| = " << fit.support.size() << ", wrote "
        << (dir / ("b_hat" + matrix_ext(o))).string() << "\n";
    return kOk;
}

int run_interaction(const Options& o, std::ostream& out) {
    const ProblemData data = load_data(o);
    const Penalty pen = resolve_lambda(data, o);
    const Estimate est = estimate(data, o, pen.lambda);
    InteractionMatrix a_hat;
    if (o.method == "woodbury") {
        a_hat = interaction_fast(data.x(), est.b_hat, pen.lambda, est.support);
    } else if (o.method == "naive") {
        a_hat = interaction_naive(data.x(), est.b_hat, pen.lambda, est.support);
    } else {
        throw InvalidInput("--method must be woodbury or naive");
    }
    const InteractionReport props = inspect(a_hat.a_hat);
    json report = penalty_json(pen);
    report["schema_version"] = kSchemaVersion;
    report["method"] = to_string(a_hat.method);
    report["support_size"] = a_hat.support_size;
    report["rank_ok"] = a_hat.rank_ok;
    report["symmetry_error"] = props.symmetry_error;
    report["min_eigenvalue"] = props.min_eigenvalue;
    report["op_norm"] = props.op_norm;
    report["trace"] = a_hat.a_hat.trace();
    if (o.check) {
        const InteractionMatrix naive = interaction_naive(data.x(), est.b_hat, pen.lambda, est.support);
        const InteractionMatrix fast = interaction_fast(data.x(), est.b_hat, pen.lambda, est.support);
        const double diff = (naive.a_hat - fast.a_hat).cwiseAbs().maxCoeff();
        const double tol = 1e-8;
        const double size = static_cast<double>(a_hat.support_size);
        json check{{"naive_vs_fast_max_abs_difference", diff},
                   {"symmetric", props.symmetry_error <= 1e-10},
                   {"psd", props.min_eigenvalue >= -1e-10 * (1.0 + props.op_norm)},
                   {"op_norm_within_support_size", !a_hat.rank_ok || props.op_norm <= size + 1e-6},
                   {"agree", diff <= tol}};
        if (data.tasks() == 1) check["single_task_identity_error"] = std::abs(a_hat.a_hat(0, 0) - size);
        report["check"] = check;
        out << "naive vs fast max |diff| = " << diff << "\n";
    }
    const fs::path dir = prepare_out(o);
    io::write_matrix(dir / ("a_hat" + matrix_ext(o)), a_hat.a_hat);
    write_json(dir / "interaction_report.json", report);
    out << "|S| = " << a_hat.support_size << ", trace(A) = " << a_hat.a_hat.trace() << "\n";
    return kOk;
}

int run_ci(const Options& o, std::ostream& out) {
    const ProblemData data = load_data(o);
    if (o.task < 0 || o.task >= data.tasks()) throw InvalidInput("--task out of range");
    const Penalty pen = resolve_lambda(data, o);
    std::string variant = o.variant;
    if (variant.empty()) variant = o.j ? "unknown_sigma" : "known_sigma";

    json report = penalty_json(pen);
    report["schema_version"] = kSchemaVersion;
    report["task"] = o.task;
    NormalInterval ci;
    if (variant == "single_task") {
        const ProblemData single = data.task(o.task);
        const KnownDirection dir = known_direction(o, single);
        const Penalty pen1 = resolve_lambda(single, o);
        const LassoFit fit1 = fit_multitask_lasso(single, pen1.lambda);
        ci = single_task_interval(single, fit1.b_hat, static_cast<Index>(fit1.support.size()), dir, o.alpha);
        report["single_task_penalty"] = penalty_json(pen1);
    } else {
        const Estimate est = estimate(data, o, pen.lambda);
        const DebiasedFit df = debias(data, est, pen.lambda);
        report["support_size"] = est.support.size();
        if (variant == "known_sigma") {
            const KnownDirection dir = known_direction(o, data);
            ci = ci_known_sigma(df, dir, o.task, o.alpha);
            report["direction"] = vector_json(dir.a);
        } else if (variant == "unknown_sigma") {
            const Index j = require_j(o, data.p());
            const NodewiseFit nw = fit_nodewise(data.x(), j);
            const TauChoice tau = parse_tau(o.tau);
            ci = ci_unknown_sigma(df, nw, o.task, o.alpha, tau);
            report["j"] = j;
            report["tau"] = select_tau(nw, data.n(), tau);
            report["nodewise_penalty"] = nw.penalty;
        } else {
            throw InvalidInput("--variant must be known_sigma, unknown_sigma or single_task");
        }
    }
    report["variant"] = to_string(ci.variant);
    report["alpha"] = ci.alpha;
    report["center"] = ci.center;
    report["half_length"] = ci.half_length;
    report["lower"] = ci.lower;
    report["upper"] = ci.upper;
    const fs::path dir = prepare_out(o);
    write_json(dir / "ci.json", report);
    out << "[" << ci.lower << ", " << ci.upper << "]\n";
    return kOk;
}

EllipsoidRegion build_region(const Options& o, const ProblemData& data, const DebiasedFit& df,
                             EllipsoidVariant variant, json& report) {
    if (is_unknown_sigma(variant)) {
        const Index j = require_j(o, data.p());
        const NodewiseFit nw = fit_nodewise(data.x(), j);
        report["j"] = j;
        return ellipsoid_unknown_sigma(df, nw, o.alpha,
                                       variant == EllipsoidVariant::hat_E_j ? EllipsoidScale::gamma_hat_matrix
                                                                             : EllipsoidScale::sigma_hat);
    }
    KnownDirection dir = known_direction(o, data);
    report["direction"] = vector_json(dir.a);
    if (variant == EllipsoidVariant::check_E_sigma_hat) return ellipsoid_sigma_hat(df, dir, o.alpha);
    return ellipsoid_known_sigma(df, dir, o.alpha, variant);
}

int run_ellipsoid(const Options& o, std::ostream& out) {
    const ProblemData data = load_data(o);
    const Penalty pen = resolve_lambda(data, o);
    const Estimate est = estimate(data, o, pen.lambda);
    const DebiasedFit df = debias(data, est, pen.lambda);
    const EllipsoidVariant variant = parse_ellipsoid(o.variant.empty() ? (o.j ? "hat_E_j" : "hat_E") : o.variant);
    json report = penalty_json(pen);
    report["schema_version"] = kSchemaVersion;
    const EllipsoidRegion region = build_region(o, data, df, variant, report);
    report["variant"] = to_string(region.variant);
    report["alpha"] = region.alpha;
    report["q"] = region.q;
    report["center_u"] = vector_json(region.center_u);
    report["shape_c"] = matrix_rows(region.shape_c);
    report["radius"] = ellipsoid_radius(region);
    const fs::path dir = prepare_out(o);
    write_json(dir / "ellipsoid.json", report);
    out << "q = " << region.q << ", radius = " << report["radius"].get<double>() << "\n";
    return kOk;
}

int run_test_row(const Options& o, std::ostream& out) {
    const ProblemData data = load_data(o);
    const Index j = require_j(o, data.p());
    const Penalty pen = resolve_lambda(data, o);
    const Estimate est = estimate(data, o, pen.lambda);
    const DebiasedFit df = debias(data, est, pen.lambda);
    Options known = o;
    if (known.direction.empty()) known.direction = "e:" + std::to_string(j);
    const std::string fallback = o.sigma_file.empty() ? "hat_E_j" : "hat_E";
    const EllipsoidVariant variant = parse_ellipsoid(o.variant.empty() ? fallback : o.variant);
    json report = penalty_json(pen);
    report["schema_version"] = kSchemaVersion;
    const EllipsoidRegion region = build_region(known, data, df, variant, report);
    const RowTest test = test_row_null(region);
    report["j"] = j;
    report["variant"] = to_string(region.variant);
    report["alpha"] = region.alpha;
    report["q"] = region.q;
    report["statistic"] = test.pivot_at_zero;
    report["p_value"] = 1.0 - chi_cdf(test.pivot_at_zero, static_cast<int>(data.tasks()));
    report["reject"] = test.reject;
    const fs::path dir = prepare_out(o);
    write_json(dir / "test_row.json", report);
    out << (test.reject ? "reject" : "retain") << " H0: row " << j << " = 0 (statistic " << test.pivot_at_zero
        << ", q " << region.q << ")\n";
    return kOk;
}

int run_simulate(const Options& o, std::ostream& out) {
    SimConfig cfg = o.preset.empty() ? SimConfig{} : preset(o.preset);
    if (!o.config.empty()) cfg = config_from_json(io::read_text(o.config), cfg);
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) {
        cfg.threads = *o.threads;
    } else if (const char* env = std::getenv("MTLASSO_THREADS"); env && *env) {
        const double t = parse_double(env, "MTLASSO_THREADS");
        if (t < 0 || t != std::floor(t)) throw InvalidInput("MTLASSO_THREADS must be a nonnegative integer");
        cfg.threads = static_cast<int>(t);
    }
    cfg.validate();
    const SimResult result = run_monte_carlo(cfg);
    const fs::path dir = prepare_out(o);
    io::write_text_atomic(dir / "replicates.csv", replicates_csv(result.records));
    io::write_text_atomic(dir / "summary.json", summary_json(result));
    io::write_text_atomic(dir / "config.json", config_json(cfg));
    out << result.summary.requested - result.summary.failures << "/" << result.summary.requested
        << " replicates, outputs in " << dir.string() << "\n";
    for (const auto& [k, c] : result.summary.coverage) out << "  coverage " << k << ": " << c.rate << "\n";
    for (const auto& [k, p] : result.summary.pivots) out << "  ks " << k << ": " << p.ks << "\n";
    return kOk;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, int code,
                  json extra = json::object()) {
    json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    for (auto& [k, v] : extra.items()) j[k] = v;
    err << j.dump() << "\n";
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Debiased multi-task Lasso: fitting, confidence sets and simulations"};
    app.require_subcommand(1);

    auto data_opts = [&o](CLI::App* sub) {
        sub->add_option("--x", o.x, "design matrix X (n x p), CSV or .json")->required();
        sub->add_option("--y", o.y, "responses Y (n x T), CSV or .json")->required();
        sub->add_option("--lambda", o.lambda, "penalty level, or 'auto'");
        sub->add_option("--s", o.s, "sparsity guess used by the automatic penalty")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--format", o.format, "matrix output format")->check(CLI::IsMember({"csv", "json"}));
    };
    auto inference_opts = [&o](CLI::App* sub) {
        sub->add_option("--bhat", o.bhat, "use this estimate instead of fitting");
        sub->add_option("--alpha", o.alpha, "level (1 - alpha confidence)");
        sub->add_option("--sigma-file", o.sigma_file, "known covariance Sigma (p x p)");
        sub->add_option("--direction", o.direction, "direction a: vector file or e:<k>");
        sub->add_option("--j", o.j, "row index (0-based) for unknown-Sigma inference");
        sub->add_option("--variant", o.variant, "interval or region variant");
        sub->add_option("--tau", o.tau, "scale for unknown-Sigma intervals: inner or norm");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit the multi-task Lasso");
    data_opts(fit);
    CLI::App* inter = app.add_subcommand("interaction", "compute the interaction matrix A-hat");
    data_opts(inter);
    inter->add_option("--bhat", o.bhat, "use this estimate instead of fitting");
    inter->add_option("--method", o.method, "woodbury or naive");
    inter->add_flag("--check", o.check, "compare both methods and check the matrix properties");
    CLI::App* ci = app.add_subcommand("ci", "confidence interval for one entry");
    data_opts(ci);
    inference_opts(ci);
    ci->add_option("--task", o.task, "task index (0-based)");
    CLI::App* ell = app.add_subcommand("ellipsoid", "confidence ellipsoid for a row");
    data_opts(ell);
    inference_opts(ell);
    CLI::App* row = app.add_subcommand("test-row", "test H0: row j of B* is zero");
    data_opts(row);
    inference_opts(row);
    CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo campaign");
    sim->add_option("--config", o.config, "JSON config with schema_version");
    sim->add_option("--preset", o.preset, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
    sim->add_option("--seed", o.seed, "master seed");
    sim->add_option("--threads", o.threads, "worker threads (default: MTLASSO_THREADS, then all cores)");
    sim->add_option("--out", o.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, "usage", e.what(), kUsage);
        return kUsage;
    }

    try {
        if (fit->parsed()) return run_fit(o, out);
        if (inter->parsed()) return run_interaction(o, out);
        if (ci->parsed()) return run_ci(o, out);
        if (ell->parsed()) return run_ellipsoid(o, out);
        if (row->parsed()) return run_test_row(o, out);
        if (sim->parsed()) return run_simulate(o, out);
        report_error(err, "usage", "no subcommand", kUsage);
        return kUsage;
    } catch (const ConvergenceError& e) {
        report_error(err, "convergence", e.what(), kNumeric,
                     {{"kkt_residual", e.kkt_residual()}, {"iterations", e.iterations()}});
        return kNumeric;
    } catch (const NumericError& e) {
        report_error(err, "numeric", e.what(), kNumeric);
        return kNumeric;
    } catch (const InvalidInput& e) {
        report_error(err, "invalid_input", e.what(), kUsage);
        return kUsage;
    } catch (const Error& e) {
        report_error(err, "io", e.what(), kUsage);
        return kUsage;
    } catch (const std::exception& e) {
        report_error(err, "internal", e.what(), kNumeric);
        return kNumeric;
    }
}

}  // namespace mtlasso::cli
