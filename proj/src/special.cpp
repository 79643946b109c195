#include "mtlasso/special.hpp"

#include "mtlasso/types.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace mtlasso {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxTerms = 10000;

// Returns {P(a, x), Q(a, x)}, each computed directly in the regime where it
// does not suffer cancellation.
std::pair<double, double> incomplete_gamma(double a, double x) {
    if (!(a > 0.0)) throw InvalidInput("incomplete gamma: a must be positive");
    if (x < 0.0 || std::isnan(x)) throw InvalidInput("incomplete gamma: x must be nonnegative");
    if (x == 0.0) return {0.0, 1.0};
    if (std::isinf(x)) return {1.0, 0.0};
    const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);

    if (x < a + 1.0) {
        // P(a, x) = e^{-x} x^a / Gamma(a) * sum_k x^k / (a (a+1) ... (a+k))
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int k = 0; k < kMaxTerms; ++k) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * kEps) break;
        }
        const double p = sum * std::exp(log_prefactor);
        return {p, 1.0 - p};
    }

    // Q(a, x) by the Legendre continued fraction, modified Lentz evaluation.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    const double q = std::exp(log_prefactor) * h;
    return {1.0 - q, q};
}

}  // namespace

double regularized_gamma_p(double a, double x) { return incomplete_gamma(a, x).first; }

double chi_cdf(double q, int dof) {
    if (dof < 1) throw InvalidInput("chi_cdf: degrees of freedom must be positive");
    if (q <= 0.0) return 0.0;
    return incomplete_gamma(0.5 * dof, 0.5 * q * q).first;
}

double chi_quantile(int dof, double alpha) {
    if (dof < 1) throw InvalidInput("chi_quantile: degrees of freedom must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("chi_quantile: alpha must lie in (0, 1)");
    const double a = 0.5 * dof;
    // Upper tail P(chi > q) is decreasing in q; bracket alpha, then bisect.
    auto upper_tail = [a](double q) { return incomplete_gamma(a, 0.5 * q * q).second; };
    double lo = 0.0;
    double hi = std::sqrt(static_cast<double>(dof)) + 1.0;
    while (upper_tail(hi) > alpha) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 4.0 * kEps * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (upper_tail(mid) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw InvalidInput("normal_quantile: probability must lie in (0, 1)");
    if (prob == 0.5) return 0.0;
    // |Z| is chi with one degree of freedom.
    if (prob > 0.5) return chi_quantile(1, 2.0 * (1.0 - prob));
    return -chi_quantile(1, 2.0 * prob);
}

}  // namespace mtlasso
