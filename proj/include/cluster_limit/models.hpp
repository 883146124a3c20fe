#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cluster_limit/parallel.hpp"
#include "cluster_limit/rng.hpp"
#include "cluster_limit/stats.hpp"

namespace cluster_limit {

/// Marginal tail probabilities at a level x > 0.
struct TailProbs {
    double two_sided = 0.0;  // P(|xi| > x)
    double right = 0.0;      // P(xi > x)
    double left = 0.0;       // P(xi < -x)
};

/// Result of inverting a tail to a target level 1/n. `exact` is false when
/// the level is not achievable inside the bisection bracket; the nearest
/// achievable value is returned with its residual.
struct LevelResult {
    double value = 0.0;
    double residual = 0.0;  // |n * tail(value) - 1|
    bool exact = true;
};

/// Stationary sequence generator with known (or oracle-backed) tail behavior.
class SequenceModel {
  public:
    enum class Kind { iid_pareto, moving_max, ar1, associated_linear };

    /// |xi| Pareto(alpha) on [1,inf), sign + with probability p.
    static SequenceModel iid_pareto(double alpha, double p);
    /// xi_j = max(Z_j, ..., Z_{j-window+1}) with Z i.i.d. Pareto(alpha).
    static SequenceModel moving_max(int window, double alpha);
    /// xi_j = phi * xi_{j-1} + eps_j with eps symmetric, |eps| Pareto(alpha).
    static SequenceModel ar1(double phi, double alpha);
    /// xi_j = sum_{i=0}^{depth} 2^-i eps_{j-i} with eps i.i.d. Bernoulli(1/2);
    /// associated, marginal within 2^-depth of Uniform[0,2].
    static SequenceModel associated_linear(int depth = 60);

    Kind kind() const { return kind_; }
    bool is_iid() const { return kind_ == Kind::iid_pareto; }
    double alpha() const { return alpha_; }
    double sign_weight() const { return p_; }
    int window() const { return window_; }
    double phi() const { return phi_; }
    int depth() const { return depth_; }
    std::int64_t burn_in() const { return burn_in_; }
    std::optional<double> known_theta() const { return known_theta_; }
    std::string label() const;

    /// Marginal tails; analytic for all kinds except ar1, which evaluates the
    /// cached Monte Carlo tail oracle.
    TailProbs tail(double x) const;

    /// u_n with n * P(xi > u_n) = 1, by bisection on the right tail.
    LevelResult level_u(std::int64_t n) const;

    /// a_n with n * P(|xi| > a_n) = 1, by bisection on the two-sided tail.
    LevelResult scale_a(std::int64_t n) const;

    bool operator==(const SequenceModel&) const = default;

    void to_json(nlohmann::json& j) const;
    static SequenceModel from_json(const nlohmann::json& j);

  private:
    SequenceModel() = default;

    Kind kind_ = Kind::iid_pareto;
    double alpha_ = 1.0;
    double p_ = 1.0;      // iid_pareto only
    int window_ = 1;      // moving_max only
    double phi_ = 0.0;    // ar1 only
    int depth_ = 60;      // associated_linear only
    std::int64_t burn_in_ = 0;
    std::optional<double> known_theta_;

    LevelResult invert_tail(std::int64_t n, bool two_sided) const;
};

/// Streaming stationary sampler: burn-in is consumed at construction, after
/// which next() yields xi_1, xi_2, ...  Deterministic in the stream.
class PathSampler {
  public:
    PathSampler(const SequenceModel& model, rng::Stream stream);

    double next();

    /// Innovation consumed by the most recent next() (the Pareto Z for
    /// moving_max, eps for ar1, the fresh 0/1 bit for associated_linear, the
    /// value itself for iid_pareto).
    double last_innovation() const { return last_innovation_; }

    /// Current ar1 state (xi_0 right after construction).
    double state() const { return state_; }

  private:
    const SequenceModel model_;
    rng::Stream stream_;
    std::vector<double> ring_;  // moving_max window
    std::size_t ring_pos_ = 0;
    double state_ = 0.0;          // ar1 state
    std::uint64_t bit_window_ = 0;  // associated_linear window
    double last_innovation_ = 0.0;

    double draw_signed_pareto(double p);
};

/// Path of length n >= 1, deterministic in (model, n, seed).
std::vector<double> sample_path(const SequenceModel& model, std::int64_t n, std::uint64_t seed);

struct PathWithInnovations {
    std::vector<double> path;
    std::vector<double> innovations;
    double initial_state = 0.0;  // ar1: xi_0 entering the recursion
};

/// As sample_path, but retains the innovation sequence so tests can replay
/// the defining recursion exactly.
PathWithInnovations sample_path_with_innovations(const SequenceModel& model, std::int64_t n,
                                                 std::uint64_t seed);

/// Cached Monte Carlo marginal-tail table for models without a closed form.
/// Built once per model from a long stationary path under a fixed oracle
/// seed; evaluation is log-log interpolation inside the grid and anchored
/// power-law extrapolation (known alpha) beyond it.
class TailOracle {
  public:
    static constexpr std::int64_t kDefaultDraws = 10'000'000;
    static constexpr std::uint64_t kOracleSeed = 0x0a11ce5eedULL;

    static TailOracle build(const SequenceModel& model, std::int64_t draws, std::uint64_t seed);
    static const TailOracle& for_model(const SequenceModel& model);

    double two_sided(double x) const;
    double right(double x) const;

    void to_json(nlohmann::json& j) const;
    static TailOracle from_json(const nlohmann::json& j);

  private:
    std::vector<double> grid_;       // x values, ascending
    std::vector<double> tail_two_;   // P(|xi| > x), descending
    std::vector<double> tail_right_;
    std::vector<double> ci_half_;    // normal-approximation half widths
    double alpha_ = 1.0;
    std::int64_t draws_ = 0;
    std::uint64_t seed_ = 0;

    static double eval(const std::vector<double>& grid, const std::vector<double>& tail, double x,
                       double alpha);
};

struct LagCovariance {
    std::int64_t lag = 0;
    double covariance = 0.0;
    double ci_half_width = 0.0;
};

/// Monte Carlo estimate of n * sum_{j=m+1}^{n} Cov(1{xi_1>u_n}, 1{xi_j>u_n}),
/// together with the per-lag covariance table that feeds it. Lags beyond
/// max_lag are treated as exactly zero; for associated_linear that bound is
/// depth+1, where independence is structural.
struct AssocBound {
    double partial_sum = 0.0;
    double se = 0.0;
    stats::CI ci;
    std::vector<LagCovariance> lags;  // lags 1..max_lag
    std::int64_t max_lag = 0;
    double threshold = 0.0;  // u_n used for the indicators
};

AssocBound assoc_covariance_bound(const SequenceModel& model, std::int64_t n, std::int64_t m,
                                  std::int64_t reps, std::uint64_t seed,
                                  const ExecPolicy& policy = {});

}  // namespace cluster_limit
