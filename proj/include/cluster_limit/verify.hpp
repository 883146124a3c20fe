#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cluster_limit/blocks.hpp"
#include "cluster_limit/limits.hpp"
#include "cluster_limit/models.hpp"

namespace cluster_limit {

/// Pmf on {1,2,...} for total-variation comparisons.
using Pmf = std::map<std::int64_t, double>;

/// sum_k |p_k - q_k|; both inputs must sum to 1 within 1e-9.
double tv_distance(const Pmf& p, const Pmf& q);

/// Pass slack: absolute for probabilities and Laplace values, relative (to
/// the canonical mass scale at the level) for canonical masses.
struct Tolerance {
    double abs_probability = 0.02;
    double rel_mass = 0.05;
};

struct ReportRow {
    std::string check;
    std::int64_t n = 0;
    std::string label;
    double statistic = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double target = 0.0;
    double slack = 0.0;
    std::string comparison = "within_ci";  // within_ci | greater_than | less_than
    bool pass = false;

    bool evaluate() const;
};

struct ConvergenceReport {
    std::string experiment;
    std::vector<ReportRow> rows;
    nlohmann::json metadata = nlohmann::json::object();

    bool global_pass() const;
    void append(const ConvergenceReport& other);

    nlohmann::json to_json() const;
    static ConvergenceReport from_json(const nlohmann::json& j);

    /// Long-format CSV: n,x_or_f,statistic,ci_lo,ci_hi,target.
    void write_plotdata_csv(std::ostream& out) const;
};

/// Condition (a): sum_i P(Y_{i,n} > x) against nu(x, inf), per (n, x).
/// Metadata records the supremum of the statistic over the schedule per x
/// (the boundedness diagnostic).
ConvergenceReport check_condition_a(const SequenceModel& model, const CanonicalMeasure& canonical,
                                    const std::vector<std::int64_t>& n_schedule,
                                    const std::vector<double>& x_grid, ProcessMode mode,
                                    BlockRule rule, std::int64_t fixed_block_length,
                                    std::int64_t reps, std::uint64_t seed, const Tolerance& tol,
                                    const ExecPolicy& policy = {});

/// Condition (b): sum_i P(Y_{i,n} > x, N_{i,n} in M) against the canonical
/// mass of {M, beyond x}, per event. Requires tail_mass(x) > 0.
ConvergenceReport check_condition_b(const SequenceModel& model, const CanonicalMeasure& canonical,
                                    const BlockPlan& plan, double x,
                                    const std::vector<ClusterEvent>& events, ProcessMode mode,
                                    std::int64_t reps, std::uint64_t seed, const Tolerance& tol,
                                    const ExecPolicy& policy = {});

/// Laplace-functional checks per (n, f): the empirical Laplace functional
/// against the closed form, and the block functional
/// sum_i E(1 - e^{-N_{i,n}(f)}) against -log L(f).
ConvergenceReport check_laplace(const SequenceModel& model, const CanonicalMeasure& canonical,
                                const std::vector<TestFunction>& panel,
                                const std::vector<std::int64_t>& n_schedule, ProcessMode mode,
                                BlockRule rule, std::int64_t fixed_block_length, std::int64_t reps,
                                std::uint64_t seed, const Tolerance& tol,
                                const ExecPolicy& policy = {});

/// Poisson baseline for i.i.d. models with r_n = 1: the condition (a)
/// statistic against x^-alpha, Poisson GOF of the counts beyond x * a_n, and
/// degeneracy of the cluster-size distribution at 1. Runs (with a metadata
/// warning, and expected failures) for non-i.i.d. models as a negative
/// control.
ConvergenceReport check_poisson_iid(const SequenceModel& model,
                                    const std::vector<std::int64_t>& n_schedule,
                                    const std::vector<double>& x_grid, std::int64_t reps,
                                    std::uint64_t seed, const Tolerance& tol,
                                    const ExecPolicy& policy = {});

/// The five trapezoids used as the fixed test-function panel.
std::vector<TestFunction> default_panel();

/// Default condition (b) event family: total count k for k = 1..5 plus one
/// interior count event on (cut, 1].
std::vector<ClusterEvent> default_events(double interior_cut = 0.5507106781186547);

}  // namespace cluster_limit
