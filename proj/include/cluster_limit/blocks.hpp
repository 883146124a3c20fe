#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cluster_limit/cluster_event.hpp"
#include "cluster_limit/models.hpp"
#include "cluster_limit/parallel.hpp"
#include "cluster_limit/point_measure.hpp"
#include "cluster_limit/rng.hpp"
#include "cluster_limit/stats.hpp"
#include "cluster_limit/test_function.hpp"

namespace cluster_limit {

/// Exceedance mode: atoms at time positions j/n where xi_j > u_n, on (0,1].
/// Scaled mode: atoms at xi_j / a_n on the punctured line.
enum class ProcessMode { exceedance, scaled };

enum class BlockRule { sqrt_n, two_thirds, fixed };

/// Blocks J_i = ((i-1)r, ir] for i = 1..k with k = floor(n/r); trailing
/// indices j > k*r are not assigned to any block.
struct BlockPlan {
    std::int64_t n = 0;
    std::int64_t block_length = 0;
    std::int64_t block_count = 0;

    static BlockPlan make(std::int64_t n, std::int64_t block_length);
    static BlockPlan with_rule(std::int64_t n, BlockRule rule, std::int64_t fixed_length = 0);
};

const char* to_string(ProcessMode mode);
const char* to_string(BlockRule rule);

struct BlockSummary {
    std::int64_t index = 0;  // 1-based
    PointMeasure sub_process;
    std::optional<double> block_max;  // largest point modulus, absent iff null
    std::int64_t exceedance_count = 0;
};

/// Time-normalized exceedance process sum_j delta_{j/n} 1{xi_j > u}.
PointMeasure exceedance_process(std::span<const double> path, double threshold);

/// Scaled process sum_j delta_{xi_j / a}; exact zero entries are rejected.
PointMeasure scaled_process(std::span<const double> path, double scale);

/// Blocks decomposition of either process. `level` is the threshold u_n in
/// exceedance mode and the scale a_n in scaled mode.
std::vector<BlockSummary> split_blocks(std::span<const double> path, ProcessMode mode,
                                       double level, const BlockPlan& plan);

/// CSV export of block summaries: replicate,i,block_max,exceedance_count.
void write_block_summaries_csv(std::ostream& out,
                               const std::vector<std::pair<std::int64_t, BlockSummary>>& rows);

// ---------------------------------------------------------------------------
// Monte Carlo kernels. Each kernel simulates `reps` independent replicate
// paths (stream r derived from (seed, kernel salt, r)), fills per-replicate
// slots, and reduces them in replicate order, so results are identical for
// serial and parallel execution at any thread count. Slow structural
// counterparts live in blocks_reference.hpp and are pinned equal by tests.

namespace kernel_salt {
inline const std::uint64_t block_events = rng::fnv1a64("block_event_sweep");
inline const std::uint64_t cluster_sizes = rng::fnv1a64("cluster_sizes");
inline const std::uint64_t cluster_shapes = rng::fnv1a64("cluster_shapes");
inline const std::uint64_t ai_gap = rng::fnv1a64("ai_gap");
inline const std::uint64_t laplace = rng::fnv1a64("laplace_functionals");
inline const std::uint64_t counts = rng::fnv1a64("replicate_counts");
}  // namespace kernel_salt

/// Estimate of sum_{i=1}^{k_n} P(Y_{i,n} > x [, N_{i,n} in M]) pooled over
/// replicates: statistic = (qualifying (replicate, block) pairs) / reps, with
/// a Wilson interval on the pooled proportion scaled by k_n.
struct BlockEventStat {
    std::string label;
    double statistic = 0.0;
    stats::CI ci;
    std::int64_t successes = 0;
    std::int64_t trials = 0;  // reps * k_n
};

struct BlockEventSweep {
    BlockEventStat base;                 // event "always": condition (a)
    std::vector<BlockEventStat> events;  // condition (b) per event
    double level = 0.0;                  // u_n or a_n
    double x = 0.0;
};

BlockEventSweep block_event_sweep(const SequenceModel& model, const BlockPlan& plan,
                                  ProcessMode mode, double x,
                                  const std::vector<ClusterEvent>& events, std::int64_t reps,
                                  std::uint64_t seed, const ExecPolicy& policy = {});

/// Condition (a) statistic alone.
BlockEventStat condition_a_stat(const SequenceModel& model, const BlockPlan& plan,
                                ProcessMode mode, double x, std::int64_t reps, std::uint64_t seed,
                                const ExecPolicy& policy = {});

/// Conditional distribution of the per-block exceedance count given at least
/// one exceedance, pooled across replicates. Exceedance mode.
struct ClusterSizeTable {
    std::map<std::int64_t, double> pmf;
    std::int64_t qualifying_blocks = 0;
    std::int64_t total_blocks = 0;
    double threshold = 0.0;
};

ClusterSizeTable cluster_sizes(const SequenceModel& model, const BlockPlan& plan,
                               std::int64_t reps, std::uint64_t seed,
                               const ExecPolicy& policy = {});

/// Normalized shapes of qualifying blocks (block max above a_n * x), scaled
/// mode. Atoms below shape_floor after normalization are dropped: they sit
/// below the vague-topology resolution of the limit. At most max_shapes
/// shapes are returned, in deterministic (replicate, block) order.
std::vector<PointMeasure> cluster_shapes(const SequenceModel& model, const BlockPlan& plan,
                                         double x, std::int64_t reps, std::uint64_t seed,
                                         const ExecPolicy& policy = {}, double shape_floor = 0.05,
                                         std::int64_t max_shapes = 1000);

/// theta_hat = k_n * P(max_{j <= r_n} |xi_j| > a_n), the condition (a)
/// statistic of the scaled process at x = 1.
struct ExtremalIndexEstimate {
    std::int64_t n = 0;
    double theta_hat = 0.0;
    stats::CI ci;
    std::optional<double> known_theta;
    double scale = 0.0;  // a_n
};

ExtremalIndexEstimate extremal_index(const SequenceModel& model, const BlockPlan& plan,
                                     std::int64_t reps, std::uint64_t seed,
                                     const ExecPolicy& policy = {});

/// Factorization gap |E(e^{-N_n(f)}) - prod_i E(e^{-N_{i,n}(f)})| with both
/// sides estimated on common replicate paths; the CI is a delta-method
/// interval for the signed difference.
struct AiGapEstimate {
    double gap = 0.0;
    double signed_difference = 0.0;
    double se = 0.0;
    stats::CI ci;  // for the signed difference
    double full_mean = 0.0;
    double product_mean = 0.0;
};

AiGapEstimate ai_gap(const SequenceModel& model, const BlockPlan& plan, ProcessMode mode,
                     const TestFunction& f, std::int64_t reps, std::uint64_t seed,
                     const ExecPolicy& policy = {});

/// Empirical Laplace functional of the full process and the block functional
/// sum_i E(1 - e^{-N_{i,n}(f)}).
struct LaplaceFunctionalStat {
    double empirical_laplace = 0.0;
    double laplace_se = 0.0;
    double block_functional = 0.0;
    double functional_se = 0.0;
};

LaplaceFunctionalStat laplace_functionals(const SequenceModel& model, const BlockPlan& plan,
                                          ProcessMode mode, const TestFunction& f,
                                          std::int64_t reps, std::uint64_t seed,
                                          const ExecPolicy& policy = {});

/// Per-replicate counts of the full process on {|y| > x} for every x in the
/// grid, from a single scan per replicate (positions beyond x in exceedance
/// mode, |xi_j| > x a_n in scaled mode); feeds Poisson GOF and
/// void-probability checks. Layout: counts[grid_index][replicate].
std::vector<std::vector<std::int64_t>> replicate_counts_grid(
    const SequenceModel& model, std::int64_t n, ProcessMode mode,
    const std::vector<double>& x_grid, std::int64_t reps, std::uint64_t seed,
    const ExecPolicy& policy = {});

std::vector<std::int64_t> replicate_counts(const SequenceModel& model, std::int64_t n,
                                           ProcessMode mode, double x, std::int64_t reps,
                                           std::uint64_t seed, const ExecPolicy& policy = {});

}  // namespace cluster_limit
