#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace cluster_limit::stats {

/// Two-sided confidence interval.
struct CI {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return lo <= v && v <= hi; }
    double half_width() const { return 0.5 * (hi - lo); }
};

/// z quantile for the default 99% two-sided confidence level.
inline constexpr double kZ99 = 2.5758293035489004;

CI wilson_ci(std::int64_t successes, std::int64_t trials, double z = kZ99);

/// Normal-approximation interval mean +- z * se.
CI normal_ci(double mean, double se, double z = kZ99);

/// Streaming mean/variance accumulator (Welford).
class MeanAccumulator {
  public:
    void add(double x);
    std::int64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;          // sample variance (n-1 denominator)
    double standard_error() const;    // sqrt(variance / n)

  private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Regularized incomplete gamma functions P(a,x), Q(a,x) = 1 - P(a,x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Survival function of the chi-square distribution with dof degrees.
double chi_square_sf(double x, int dof);

struct GofResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool degenerate = false;  // too little spread to form bins; trivially passes
};

/// Pearson chi-square goodness of fit of observed nonnegative integer counts
/// against Poisson(mean). Adjacent bins are pooled until each expected count
/// reaches min_expected.
GofResult poisson_gof(const std::vector<std::int64_t>& counts, double mean,
                      double min_expected = 5.0);

/// Two-sample Kolmogorov-Smirnov test; returns the asymptotic p-value.
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace cluster_limit::stats
