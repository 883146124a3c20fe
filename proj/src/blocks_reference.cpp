#include "cluster_limit/blocks_reference.hpp"

#include <cmath>
#include <stdexcept>

namespace cluster_limit::reference {

namespace {

// Full replicate path from the same stream the fused kernel uses; the fused
// scans stop after block_count * block_length draws, so the leading draws
// coincide and the trailing ones are simply unused there.
std::vector<double> replicate_path(const SequenceModel& model, std::int64_t length,
                                   std::uint64_t seed, std::uint64_t salt, std::int64_t r) {
    PathSampler sampler(model, rng::Stream(seed, salt, static_cast<std::uint64_t>(r)));
    std::vector<double> path(static_cast<std::size_t>(length));
    for (auto& v : path) v = sampler.next();
    return path;
}

double mode_level(const SequenceModel& model, std::int64_t n, ProcessMode mode) {
    return mode == ProcessMode::exceedance ? model.level_u(n).value : model.scale_a(n).value;
}

BlockEventStat make_stat(std::string label, std::int64_t successes, std::int64_t trials,
                         double blocks) {
    BlockEventStat stat;
    stat.label = std::move(label);
    stat.successes = successes;
    stat.trials = trials;
    stat.statistic = blocks * static_cast<double>(successes) / static_cast<double>(trials);
    const stats::CI ci = stats::wilson_ci(successes, trials);
    stat.ci = {ci.lo * blocks, ci.hi * blocks};
    return stat;
}

}  // namespace

BlockEventSweep block_event_sweep(const SequenceModel& model, const BlockPlan& plan,
                                  ProcessMode mode, double x,
                                  const std::vector<ClusterEvent>& events, std::int64_t reps,
                                  std::uint64_t seed) {
    if (!(x > 0.0)) throw std::invalid_argument("block_event_sweep: x must be positive");
    if (reps < 100) throw std::invalid_argument("block_event_sweep: reps must be >= 100");
    const double level = mode_level(model, plan.n, mode);

    std::int64_t base_total = 0;
    std::vector<std::int64_t> event_totals(events.size(), 0);
    for (std::int64_t r = 0; r < reps; ++r) {
        const auto path = replicate_path(model, plan.n, seed, kernel_salt::block_events, r);
        for (const auto& summary : split_blocks(path, mode, level, plan)) {
            if (summary.sub_process.is_null()) continue;
            const double y = summary.sub_process.sup_modulus();
            if (!(y > x)) continue;
            ++base_total;
            for (std::size_t e = 0; e < events.size(); ++e) {
                if (events[e].contains(summary.sub_process)) ++event_totals[e];
            }
        }
    }

    const std::int64_t trials = reps * plan.block_count;
    const double blocks = static_cast<double>(plan.block_count);
    BlockEventSweep sweep;
    sweep.level = level;
    sweep.x = x;
    sweep.base = make_stat("always", base_total, trials, blocks);
    for (std::size_t e = 0; e < events.size(); ++e) {
        sweep.events.push_back(make_stat(events[e].label(), event_totals[e], trials, blocks));
    }
    return sweep;
}

ClusterSizeTable cluster_sizes(const SequenceModel& model, const BlockPlan& plan,
                               std::int64_t reps, std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("cluster_sizes: reps must be >= 1");
    const double u = model.level_u(plan.n).value;

    ClusterSizeTable table;
    table.threshold = u;
    table.total_blocks = reps * plan.block_count;
    std::map<std::int64_t, std::int64_t> pooled;
    for (std::int64_t r = 0; r < reps; ++r) {
        const auto path = replicate_path(model, plan.n, seed, kernel_salt::cluster_sizes, r);
        for (const auto& summary : split_blocks(path, ProcessMode::exceedance, u, plan)) {
            if (summary.exceedance_count > 0) {
                ++pooled[summary.exceedance_count];
                ++table.qualifying_blocks;
            }
        }
    }
    if (table.qualifying_blocks == 0) {
        throw std::runtime_error("cluster_sizes: no exceeding blocks");
    }
    for (const auto& [k, c] : pooled) {
        table.pmf[k] = static_cast<double>(c) / static_cast<double>(table.qualifying_blocks);
    }
    return table;
}

LaplaceFunctionalStat laplace_functionals(const SequenceModel& model, const BlockPlan& plan,
                                          ProcessMode mode, const TestFunction& f,
                                          std::int64_t reps, std::uint64_t seed) {
    if (reps < 2) throw std::invalid_argument("laplace_functionals: reps must be >= 2");
    const double level = mode_level(model, plan.n, mode);

    stats::MeanAccumulator laplace_acc, functional_acc;
    for (std::int64_t r = 0; r < reps; ++r) {
        const auto path = replicate_path(model, plan.n, seed, kernel_salt::laplace, r);
        const PointMeasure full = mode == ProcessMode::exceedance
                                      ? exceedance_process(path, level)
                                      : scaled_process(path, level);
        laplace_acc.add(std::exp(-full.pair(f)));
        double total = 0.0;
        for (const auto& summary : split_blocks(path, mode, level, plan)) {
            total += -std::expm1(-summary.sub_process.pair(f));
        }
        functional_acc.add(total);
    }
    return {laplace_acc.mean(), laplace_acc.standard_error(), functional_acc.mean(),
            functional_acc.standard_error()};
}

std::vector<PointMeasure> cluster_shapes(const SequenceModel& model, const BlockPlan& plan,
                                         double x, std::int64_t reps, std::uint64_t seed,
                                         double shape_floor, std::int64_t max_shapes) {
    if (!(x > 0.0)) throw std::invalid_argument("cluster_shapes: x must be positive");
    const double a = model.scale_a(plan.n).value;

    std::vector<PointMeasure> out;
    for (std::int64_t r = 0; r < reps; ++r) {
        const auto path = replicate_path(model, plan.n, seed, kernel_salt::cluster_shapes, r);
        for (const auto& summary : split_blocks(path, ProcessMode::scaled, a, plan)) {
            if (!summary.block_max || !(*summary.block_max > x)) continue;
            if (static_cast<std::int64_t>(out.size()) >= max_shapes) return out;
            const PointMeasure normalized = summary.sub_process.normalized_by_max();
            std::vector<PointMeasure::Atom> atoms;
            for (const auto& atom : normalized.atoms()) {
                if (std::abs(atom.location) > shape_floor) atoms.push_back(atom);
            }
            out.emplace_back(normalized.space(), std::move(atoms));
        }
    }
    if (out.empty()) throw std::runtime_error("cluster_shapes: no qualifying blocks");
    return out;
}

}  // namespace cluster_limit::reference
