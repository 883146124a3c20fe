#include "cluster_limit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cluster_limit::stats {

CI wilson_ci(std::int64_t successes, std::int64_t trials, double z) {
    if (trials <= 0) throw std::invalid_argument("wilson_ci: trials must be positive");
    if (successes < 0 || successes > trials) {
        throw std::invalid_argument("wilson_ci: successes out of range");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

CI normal_ci(double mean, double se, double z) { return {mean - z * se, mean + z * se}; }

void MeanAccumulator::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double MeanAccumulator::variance() const {
    if (n_ < 2) return 0.0;
    return m2_ / static_cast<double>(n_ - 1);
}

double MeanAccumulator::standard_error() const {
    if (n_ < 1) return 0.0;
    return std::sqrt(variance() / static_cast<double>(n_));
}

namespace {

// Series expansion of P(a,x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x) (modified Lentz), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_sf(double x, int dof) {
    if (dof <= 0) throw std::invalid_argument("chi_square_sf: dof must be positive");
    if (x <= 0.0) return 1.0;
    return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

GofResult poisson_gof(const std::vector<std::int64_t>& counts, double mean, double min_expected) {
    if (counts.empty()) throw std::invalid_argument("poisson_gof: no observations");
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson_gof: mean must be >= 0");

    const auto n = static_cast<double>(counts.size());
    std::int64_t max_count = 0;
    for (auto c : counts) {
        if (c < 0) throw std::invalid_argument("poisson_gof: negative count");
        max_count = std::max(max_count, c);
    }

    // Per-value expected frequencies n * pmf(k), then a tail bin.
    std::vector<double> expected;
    std::vector<double> observed;
    double pmf = std::exp(-mean);
    double cdf = 0.0;
    std::vector<std::int64_t> histogram(static_cast<std::size_t>(max_count) + 1, 0);
    for (auto c : counts) ++histogram[static_cast<std::size_t>(c)];
    for (std::int64_t k = 0; k <= max_count; ++k) {
        if (k > 0) pmf *= mean / static_cast<double>(k);
        cdf += pmf;
        expected.push_back(n * pmf);
        observed.push_back(static_cast<double>(histogram[static_cast<std::size_t>(k)]));
    }
    expected.push_back(n * std::max(0.0, 1.0 - cdf));
    observed.push_back(0.0);

    // Pool bins from the right until every expected count is large enough.
    std::vector<double> exp_pooled, obs_pooled;
    double e_run = 0.0, o_run = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        e_run += expected[i];
        o_run += observed[i];
        if (e_run >= min_expected) {
            exp_pooled.push_back(e_run);
            obs_pooled.push_back(o_run);
            e_run = o_run = 0.0;
        }
    }
    if (e_run > 0.0 || o_run > 0.0) {
        if (exp_pooled.empty()) {
            exp_pooled.push_back(e_run);
            obs_pooled.push_back(o_run);
        } else {
            exp_pooled.back() += e_run;
            obs_pooled.back() += o_run;
        }
    }

    GofResult result;
    if (exp_pooled.size() < 2) {
        // Everything in one bin: the distribution is (numerically) degenerate
        // at a single value and the test carries no information.
        result.degenerate = true;
        result.p_value = 1.0;
        return result;
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < exp_pooled.size(); ++i) {
        const double diff = obs_pooled[i] - exp_pooled[i];
        stat += diff * diff / exp_pooled[i];
    }
    result.statistic = stat;
    result.dof = static_cast<int>(exp_pooled.size()) - 1;
    result.p_value = chi_square_sf(stat, result.dof);
    return result;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += 2.0 * sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    p = std::clamp(p, 0.0, 1.0);
    return {d, p};
}

}  // namespace cluster_limit::stats
