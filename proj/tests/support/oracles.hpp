#pragma once

// Independent oracles used only by tests: deliberately simple and separate
// from the implementation paths they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cluster_limit/models.hpp"
#include "cluster_limit/rng.hpp"

namespace test_oracles {

/// Composite Simpson integration with uniform refinement until two successive
/// halvings agree to rel_tol. Independent of the adaptive Gauss-Kronrod path.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double rel_tol = 1e-9) {
    auto pass = [&](std::int64_t intervals) {
        const double h = (b - a) / static_cast<double>(intervals);
        double sum = f(a) + f(b);
        for (std::int64_t i = 1; i < intervals; ++i) {
            sum += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
        }
        return sum * h / 3.0;
    };
    double prev = pass(64);
    for (std::int64_t intervals = 128; intervals <= (1 << 22); intervals *= 2) {
        const double cur = pass(intervals);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur) + 1e-14) return cur;
        prev = cur;
    }
    throw std::runtime_error("simpson: did not converge");
}

/// Runs-declustering estimate of the extremal index: the fraction of
/// exceedances of u that start a cluster, where a cluster break is a gap of
/// at least `separation` non-exceedances.
inline double runs_theta(const cluster_limit::SequenceModel& model, std::int64_t n, double u,
                         std::int64_t separation, std::uint64_t seed) {
    cluster_limit::PathSampler sampler(
        model, cluster_limit::rng::Stream(seed, cluster_limit::rng::fnv1a64("runs_oracle"), 0));
    std::int64_t exceedances = 0;
    std::int64_t clusters = 0;
    std::int64_t since_last = separation + 1;
    for (std::int64_t j = 0; j < n; ++j) {
        const bool hit = std::abs(sampler.next()) > u;
        if (hit) {
            ++exceedances;
            if (since_last > separation) ++clusters;
            since_last = 0;
        } else {
            ++since_last;
        }
    }
    if (exceedances == 0) throw std::runtime_error("runs_theta: no exceedances");
    return static_cast<double>(clusters) / static_cast<double>(exceedances);
}

/// Conditional binomial law of the within-block exceedance count given at
/// least one success: P(Bin(r, p) = k | >= 1), for k = 1..k_max.
inline std::vector<double> binomial_cluster_pmf(std::int64_t r, double p, std::int64_t k_max) {
    std::vector<double> pmf;
    const double none = std::pow(1.0 - p, static_cast<double>(r));
    double log_choose = 0.0;
    for (std::int64_t k = 1; k <= k_max; ++k) {
        log_choose += std::log(static_cast<double>(r - k + 1)) - std::log(static_cast<double>(k));
        const double log_pk = log_choose + static_cast<double>(k) * std::log(p) +
                              static_cast<double>(r - k) * std::log1p(-p);
        pmf.push_back(std::exp(log_pk) / (1.0 - none));
    }
    return pmf;
}

}  // namespace test_oracles
