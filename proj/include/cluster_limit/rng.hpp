#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace cluster_limit::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Order-sensitive 64-bit hash combine; the basis of the counter-based
/// seed-splitting scheme: stream r of a kernel with salt s under user seed u
/// is seeded from mix3(u, s, r).
inline std::uint64_t mix2(std::uint64_t a, std::uint64_t b) {
    std::uint64_t state = a;
    state = splitmix64(state) ^ (b + 0x9e3779b97f4a7c15ULL);
    return splitmix64(state);
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix2(mix2(a, b), c);
}

inline std::uint64_t fnv1a64(const char* text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char* p = text; *p; ++p) {
        hash ^= static_cast<unsigned char>(*p);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

/// Deterministic random stream. Replicates derive independent streams from
/// (seed, salt, replicate); draws are reproducible across platforms because
/// every variate is built from raw 64-bit engine output, never from
/// implementation-defined std distributions.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t salt, std::uint64_t replicate)
        : engine_(mix3(seed, salt, replicate)) {}

    explicit Stream(std::uint64_t raw_seed) : engine_(raw_seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on [0,1).
    double uniform_halfopen() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bit() { return (engine_() >> 63) != 0; }

    /// Pareto on [1, inf): P(X > x) = x^-alpha for x >= 1.
    double pareto(double alpha) { return std::pow(uniform_open(), -1.0 / alpha); }

    double exponential() { return -std::log(uniform_open()); }

    std::int64_t poisson(double mean);

  private:
    std::mt19937_64 engine_;

    std::int64_t poisson_inversion(double mean);
    std::int64_t poisson_ptrs(double mean);
};

inline std::int64_t Stream::poisson_inversion(double mean) {
    const double target = uniform_open();
    double pmf = std::exp(-mean);
    double cdf = pmf;
    std::int64_t k = 0;
    while (target > cdf) {
        ++k;
        pmf *= mean / static_cast<double>(k);
        cdf += pmf;
        if (k > 2000) break;  // cdf has saturated numerically
    }
    return k;
}

// Transformed rejection with squeeze (Hormann's PTRS); exact for large means.
inline std::int64_t Stream::poisson_ptrs(double mean) {
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        double u = uniform_open() - 0.5;
        double v = uniform_open();
        double u_shifted = 0.5 - std::abs(u);
        double k = std::floor((2.0 * a / u_shifted + b) * u + mean + 0.43);
        if (u_shifted >= 0.07 && v <= v_r) {
            return static_cast<std::int64_t>(k);
        }
        if (k < 0.0 || (u_shifted < 0.013 && v > u_shifted)) {
            continue;
        }
        const double lhs = std::log(v * inv_alpha / (a / (u_shifted * u_shifted) + b));
        const double rhs = -mean + k * log_mean - std::lgamma(k + 1.0);
        if (lhs <= rhs) {
            return static_cast<std::int64_t>(k);
        }
    }
}

inline std::int64_t Stream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("poisson: mean must be finite and >= 0");
    }
    if (mean == 0.0) return 0;
    if (mean < 30.0) return poisson_inversion(mean);
    return poisson_ptrs(mean);
}

}  // namespace cluster_limit::rng
