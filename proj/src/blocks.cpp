#include "cluster_limit/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cluster_limit {

BlockPlan BlockPlan::make(std::int64_t n, std::int64_t block_length) {
    if (n < 1) throw std::invalid_argument("BlockPlan: n must be >= 1");
    if (block_length < 1) throw std::invalid_argument("BlockPlan: block length must be >= 1");
    if (block_length > n) throw std::invalid_argument("BlockPlan: block length exceeds n");
    return {n, block_length, n / block_length};
}

BlockPlan BlockPlan::with_rule(std::int64_t n, BlockRule rule, std::int64_t fixed_length) {
    switch (rule) {
        case BlockRule::sqrt_n:
            return make(n, static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(n)))));
        case BlockRule::two_thirds:
            return make(n, static_cast<std::int64_t>(
                               std::ceil(std::pow(static_cast<double>(n), 2.0 / 3.0))));
        case BlockRule::fixed:
            return make(n, fixed_length);
    }
    throw std::logic_error("BlockPlan: unreachable");
}

const char* to_string(ProcessMode mode) {
    return mode == ProcessMode::exceedance ? "exceedance" : "scaled";
}

const char* to_string(BlockRule rule) {
    switch (rule) {
        case BlockRule::sqrt_n: return "sqrt";
        case BlockRule::two_thirds: return "two_thirds";
        case BlockRule::fixed: return "fixed";
    }
    return "unknown";
}

PointMeasure exceedance_process(std::span<const double> path, double threshold) {
    const auto n = static_cast<std::int64_t>(path.size());
    if (n < 1) throw std::invalid_argument("exceedance_process: empty path");
    std::vector<PointMeasure::Atom> atoms;
    for (std::int64_t j = 1; j <= n; ++j) {
        if (path[static_cast<std::size_t>(j - 1)] > threshold) {
            atoms.push_back({static_cast<double>(j) / static_cast<double>(n), 1});
        }
    }
    return PointMeasure(SpaceSpec::unit_interval(), std::move(atoms));
}

PointMeasure scaled_process(std::span<const double> path, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("scaled_process: scale must be positive");
    if (path.empty()) throw std::invalid_argument("scaled_process: empty path");
    std::vector<PointMeasure::Atom> atoms;
    atoms.reserve(path.size());
    for (double v : path) {
        if (v == 0.0) throw std::domain_error("scaled_process: exact zero entry");
        atoms.push_back({v / scale, 1});
    }
    return PointMeasure(SpaceSpec::punctured_line(), std::move(atoms));
}

std::vector<BlockSummary> split_blocks(std::span<const double> path, ProcessMode mode,
                                       double level, const BlockPlan& plan) {
    if (static_cast<std::int64_t>(path.size()) != plan.n) {
        throw std::invalid_argument("split_blocks: plan.n must equal the path length");
    }
    const double n = static_cast<double>(plan.n);
    std::vector<BlockSummary> out;
    out.reserve(static_cast<std::size_t>(plan.block_count));
    for (std::int64_t i = 1; i <= plan.block_count; ++i) {
        std::vector<PointMeasure::Atom> atoms;
        for (std::int64_t j = (i - 1) * plan.block_length + 1; j <= i * plan.block_length; ++j) {
            const double v = path[static_cast<std::size_t>(j - 1)];
            if (mode == ProcessMode::exceedance) {
                if (v > level) atoms.push_back({static_cast<double>(j) / n, 1});
            } else {
                if (v == 0.0) throw std::domain_error("split_blocks: exact zero entry");
                atoms.push_back({v / level, 1});
            }
        }
        BlockSummary summary;
        summary.index = i;
        summary.sub_process = PointMeasure(mode == ProcessMode::exceedance
                                               ? SpaceSpec::unit_interval()
                                               : SpaceSpec::punctured_line(),
                                           std::move(atoms));
        summary.exceedance_count = summary.sub_process.total_count();
        if (!summary.sub_process.is_null()) {
            summary.block_max = summary.sub_process.sup_modulus();
        }
        out.push_back(std::move(summary));
    }
    return out;
}

void write_block_summaries_csv(std::ostream& out,
                               const std::vector<std::pair<std::int64_t, BlockSummary>>& rows) {
    out << "replicate,i,block_max,exceedance_count\n";
    for (const auto& [replicate, summary] : rows) {
        out << replicate << ',' << summary.index << ',';
        if (summary.block_max) {
            out << *summary.block_max;
        }
        out << ',' << summary.exceedance_count << '\n';
    }
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

double mode_level(const SequenceModel& model, std::int64_t n, ProcessMode mode) {
    return mode == ProcessMode::exceedance ? model.level_u(n).value : model.scale_a(n).value;
}

stats::CI scale_ci(const stats::CI& ci, double factor) {
    return {ci.lo * factor, ci.hi * factor};
}

}  // namespace

BlockEventSweep block_event_sweep(const SequenceModel& model, const BlockPlan& plan,
                                  ProcessMode mode, double x,
                                  const std::vector<ClusterEvent>& events, std::int64_t reps,
                                  std::uint64_t seed, const ExecPolicy& policy) {
    if (!(x > 0.0)) throw std::invalid_argument("block_event_sweep: x must be positive");
    if (reps < 100) throw std::invalid_argument("block_event_sweep: reps must be >= 100");

    const double level = mode_level(model, plan.n, mode);
    const double n_real = static_cast<double>(plan.n);
    const std::size_t n_events = events.size();

    // Flatten the interval terms so the streaming scan touches plain counters.
    struct CompiledEvent {
        std::optional<std::int64_t> total;
        std::vector<std::size_t> term_index;
        std::vector<std::int64_t> term_bound;
    };
    std::vector<Interval> term_intervals;
    std::vector<CompiledEvent> compiled(n_events);
    for (std::size_t e = 0; e < n_events; ++e) {
        compiled[e].total = events[e].total();
        for (const auto& term : events[e].terms()) {
            compiled[e].term_index.push_back(term_intervals.size());
            compiled[e].term_bound.push_back(term.at_least);
            term_intervals.push_back(term.where);
        }
    }

    struct Slot {
        std::int64_t base_hits = 0;
        std::vector<std::int64_t> event_hits;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(reps));

    for_each_index(reps, policy, [&](std::int64_t r) {
        Slot& slot = slots[static_cast<std::size_t>(r)];
        slot.event_hits.assign(n_events, 0);
        PathSampler sampler(model,
                            rng::Stream(seed, kernel_salt::block_events,
                                        static_cast<std::uint64_t>(r)));
        std::vector<std::int64_t> term_counts(term_intervals.size());
        for (std::int64_t i = 1; i <= plan.block_count; ++i) {
            std::int64_t count = 0;
            std::int64_t last_exceed_j = 0;
            double max_abs = 0.0;
            std::fill(term_counts.begin(), term_counts.end(), 0);
            for (std::int64_t j = (i - 1) * plan.block_length + 1; j <= i * plan.block_length;
                 ++j) {
                const double v = sampler.next();
                if (mode == ProcessMode::exceedance) {
                    if (v > level) {
                        ++count;
                        last_exceed_j = j;
                        if (!term_intervals.empty()) {
                            const double pos = static_cast<double>(j) / n_real;
                            for (std::size_t t = 0; t < term_intervals.size(); ++t) {
                                if (term_intervals[t].contains(pos)) ++term_counts[t];
                            }
                        }
                    }
                } else {
                    ++count;
                    const double scaled = v / level;
                    max_abs = std::max(max_abs, std::abs(scaled));
                    for (std::size_t t = 0; t < term_intervals.size(); ++t) {
                        if (term_intervals[t].contains(scaled)) ++term_counts[t];
                    }
                }
            }
            double y;
            if (mode == ProcessMode::exceedance) {
                if (count == 0) continue;
                y = static_cast<double>(last_exceed_j) / n_real;
            } else {
                y = max_abs;
            }
            if (!(y > x)) continue;
            ++slot.base_hits;
            for (std::size_t e = 0; e < n_events; ++e) {
                if (compiled[e].total && count != *compiled[e].total) continue;
                bool ok = true;
                for (std::size_t t = 0; t < compiled[e].term_index.size(); ++t) {
                    if (term_counts[compiled[e].term_index[t]] < compiled[e].term_bound[t]) {
                        ok = false;
                        break;
                    }
                }
                if (ok) ++slot.event_hits[e];
            }
        }
    });

    const std::int64_t trials = reps * plan.block_count;
    const double blocks = static_cast<double>(plan.block_count);
    auto make_stat = [&](std::string label, std::int64_t successes) {
        BlockEventStat stat;
        stat.label = std::move(label);
        stat.successes = successes;
        stat.trials = trials;
        stat.statistic = blocks * static_cast<double>(successes) / static_cast<double>(trials);
        stat.ci = scale_ci(stats::wilson_ci(successes, trials), blocks);
        return stat;
    };

    BlockEventSweep sweep;
    sweep.level = level;
    sweep.x = x;
    std::int64_t base_total = 0;
    std::vector<std::int64_t> event_totals(n_events, 0);
    for (const auto& slot : slots) {
        base_total += slot.base_hits;
        for (std::size_t e = 0; e < n_events; ++e) event_totals[e] += slot.event_hits[e];
    }
    sweep.base = make_stat("always", base_total);
    for (std::size_t e = 0; e < n_events; ++e) {
        sweep.events.push_back(make_stat(events[e].label(), event_totals[e]));
    }
    return sweep;
}

BlockEventStat condition_a_stat(const SequenceModel& model, const BlockPlan& plan,
                                ProcessMode mode, double x, std::int64_t reps, std::uint64_t seed,
                                const ExecPolicy& policy) {
    return block_event_sweep(model, plan, mode, x, {}, reps, seed, policy).base;
}

ClusterSizeTable cluster_sizes(const SequenceModel& model, const BlockPlan& plan,
                               std::int64_t reps, std::uint64_t seed, const ExecPolicy& policy) {
    if (reps < 1) throw std::invalid_argument("cluster_sizes: reps must be >= 1");
    const double u = model.level_u(plan.n).value;

    struct Slot {
        std::map<std::int64_t, std::int64_t> histogram;
        std::int64_t qualifying = 0;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(reps));

    for_each_index(reps, policy, [&](std::int64_t r) {
        Slot& slot = slots[static_cast<std::size_t>(r)];
        PathSampler sampler(model,
                            rng::Stream(seed, kernel_salt::cluster_sizes,
                                        static_cast<std::uint64_t>(r)));
        for (std::int64_t i = 0; i < plan.block_count; ++i) {
            std::int64_t count = 0;
            for (std::int64_t j = 0; j < plan.block_length; ++j) {
                if (sampler.next() > u) ++count;
            }
            if (count > 0) {
                ++slot.histogram[count];
                ++slot.qualifying;
            }
        }
    });

    ClusterSizeTable table;
    table.threshold = u;
    table.total_blocks = reps * plan.block_count;
    std::map<std::int64_t, std::int64_t> pooled;
    for (const auto& slot : slots) {
        table.qualifying_blocks += slot.qualifying;
        for (const auto& [k, c] : slot.histogram) pooled[k] += c;
    }
    if (table.qualifying_blocks == 0) {
        throw std::runtime_error("cluster_sizes: no exceeding blocks");
    }
    for (const auto& [k, c] : pooled) {
        table.pmf[k] =
            static_cast<double>(c) / static_cast<double>(table.qualifying_blocks);
    }
    return table;
}

std::vector<PointMeasure> cluster_shapes(const SequenceModel& model, const BlockPlan& plan,
                                         double x, std::int64_t reps, std::uint64_t seed,
                                         const ExecPolicy& policy, double shape_floor,
                                         std::int64_t max_shapes) {
    if (!(x > 0.0)) throw std::invalid_argument("cluster_shapes: x must be positive");
    if (!(shape_floor >= 0.0 && shape_floor < 1.0)) {
        throw std::invalid_argument("cluster_shapes: shape_floor must be in [0,1)");
    }
    const double a = model.scale_a(plan.n).value;

    std::vector<std::vector<PointMeasure>> slots(static_cast<std::size_t>(reps));

    for_each_index(reps, policy, [&](std::int64_t r) {
        auto& shapes = slots[static_cast<std::size_t>(r)];
        PathSampler sampler(model,
                            rng::Stream(seed, kernel_salt::cluster_shapes,
                                        static_cast<std::uint64_t>(r)));
        std::vector<double> block(static_cast<std::size_t>(plan.block_length));
        for (std::int64_t i = 0; i < plan.block_count; ++i) {
            double max_abs = 0.0;
            for (auto& v : block) {
                v = sampler.next() / a;
                max_abs = std::max(max_abs, std::abs(v));
            }
            if (!(max_abs > x)) continue;
            if (static_cast<std::int64_t>(shapes.size()) >= max_shapes) continue;
            std::vector<PointMeasure::Atom> atoms;
            for (double v : block) {
                const double loc = v / max_abs;
                if (loc != 0.0 && std::abs(loc) > shape_floor) atoms.push_back({loc, 1});
            }
            shapes.emplace_back(SpaceSpec::punctured_line(), std::move(atoms));
        }
    });

    std::vector<PointMeasure> out;
    for (const auto& shapes : slots) {
        for (const auto& shape : shapes) {
            if (static_cast<std::int64_t>(out.size()) >= max_shapes) return out;
            out.push_back(shape);
        }
    }
    if (out.empty()) throw std::runtime_error("cluster_shapes: no qualifying blocks");
    return out;
}

ExtremalIndexEstimate extremal_index(const SequenceModel& model, const BlockPlan& plan,
                                     std::int64_t reps, std::uint64_t seed,
                                     const ExecPolicy& policy) {
    const BlockEventStat stat =
        condition_a_stat(model, plan, ProcessMode::scaled, 1.0, reps, seed, policy);
    ExtremalIndexEstimate est;
    est.n = plan.n;
    est.theta_hat = stat.statistic;
    est.ci = stat.ci;
    est.known_theta = model.known_theta();
    est.scale = model.scale_a(plan.n).value;
    return est;
}

namespace {

// Shared per-replicate scan for the Laplace-functional kernels: the full-path
// value N_n(f) plus each block's N_{i,n}(f).
struct LaplaceScan {
    double full_sum = 0.0;
    std::vector<double> block_sums;
};

LaplaceScan laplace_scan(const SequenceModel& model, const BlockPlan& plan, ProcessMode mode,
                         const TestFunction& f, double level, rng::Stream stream) {
    LaplaceScan scan;
    scan.block_sums.assign(static_cast<std::size_t>(plan.block_count), 0.0);
    PathSampler sampler(model, stream);
    const double n_real = static_cast<double>(plan.n);
    const double gap_cut = f.inner_gap() * level;  // scaled mode quick reject
    for (std::int64_t j = 1; j <= plan.n; ++j) {
        const double v = sampler.next();
        double contribution = 0.0;
        if (mode == ProcessMode::exceedance) {
            if (v > level) contribution = f(static_cast<double>(j) / n_real);
        } else {
            if (std::abs(v) > gap_cut) contribution = f(v / level);
        }
        if (contribution != 0.0) {
            scan.full_sum += contribution;
            const std::int64_t block = (j - 1) / plan.block_length;  // 0-based
            if (block < plan.block_count) {
                scan.block_sums[static_cast<std::size_t>(block)] += contribution;
            }
        }
    }
    return scan;
}

}  // namespace

AiGapEstimate ai_gap(const SequenceModel& model, const BlockPlan& plan, ProcessMode mode,
                     const TestFunction& f, std::int64_t reps, std::uint64_t seed,
                     const ExecPolicy& policy) {
    if (reps < 2) throw std::invalid_argument("ai_gap: reps must be >= 2");
    const double level = mode_level(model, plan.n, mode);
    const auto k = static_cast<std::size_t>(plan.block_count);

    struct Slot {
        double exp_full = 1.0;
        std::vector<double> exp_block;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(reps));

    for_each_index(reps, policy, [&](std::int64_t r) {
        Slot& slot = slots[static_cast<std::size_t>(r)];
        const LaplaceScan scan =
            laplace_scan(model, plan, mode, f, level,
                         rng::Stream(seed, kernel_salt::ai_gap, static_cast<std::uint64_t>(r)));
        slot.exp_full = std::exp(-scan.full_sum);
        slot.exp_block.resize(k);
        for (std::size_t i = 0; i < k; ++i) slot.exp_block[i] = std::exp(-scan.block_sums[i]);
    });

    const double r_real = static_cast<double>(reps);
    double full_mean = 0.0;
    std::vector<double> block_means(k, 0.0);
    for (const auto& slot : slots) {
        full_mean += slot.exp_full;
        for (std::size_t i = 0; i < k; ++i) block_means[i] += slot.exp_block[i];
    }
    full_mean /= r_real;
    double log_product = 0.0;
    for (auto& m : block_means) {
        m /= r_real;
        log_product += std::log(m);
    }
    const double product = std::exp(log_product);

    // Delta-method SE of (full_mean - product) from per-replicate influence
    // values; the two estimates share paths, so the leading noise cancels.
    stats::MeanAccumulator influence;
    for (const auto& slot : slots) {
        double psi = slot.exp_full;
        for (std::size_t i = 0; i < k; ++i) {
            psi -= (product / block_means[i]) * slot.exp_block[i];
        }
        influence.add(psi);
    }

    AiGapEstimate est;
    est.full_mean = full_mean;
    est.product_mean = product;
    est.signed_difference = full_mean - product;
    est.gap = std::abs(est.signed_difference);
    est.se = influence.standard_error();
    est.ci = stats::normal_ci(est.signed_difference, est.se);
    return est;
}

LaplaceFunctionalStat laplace_functionals(const SequenceModel& model, const BlockPlan& plan,
                                          ProcessMode mode, const TestFunction& f,
                                          std::int64_t reps, std::uint64_t seed,
                                          const ExecPolicy& policy) {
    if (reps < 2) throw std::invalid_argument("laplace_functionals: reps must be >= 2");
    const double level = mode_level(model, plan.n, mode);

    struct Slot {
        double laplace = 1.0;
        double functional = 0.0;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(reps));

    for_each_index(reps, policy, [&](std::int64_t r) {
        Slot& slot = slots[static_cast<std::size_t>(r)];
        const LaplaceScan scan =
            laplace_scan(model, plan, mode, f, level,
                         rng::Stream(seed, kernel_salt::laplace, static_cast<std::uint64_t>(r)));
        slot.laplace = std::exp(-scan.full_sum);
        double total = 0.0;
        for (double s : scan.block_sums) total += -std::expm1(-s);
        slot.functional = total;
    });

    stats::MeanAccumulator laplace_acc, functional_acc;
    for (const auto& slot : slots) {
        laplace_acc.add(slot.laplace);
        functional_acc.add(slot.functional);
    }
    return {laplace_acc.mean(), laplace_acc.standard_error(), functional_acc.mean(),
            functional_acc.standard_error()};
}

std::vector<std::vector<std::int64_t>> replicate_counts_grid(
    const SequenceModel& model, std::int64_t n, ProcessMode mode,
    const std::vector<double>& x_grid, std::int64_t reps, std::uint64_t seed,
    const ExecPolicy& policy) {
    if (n < 1) throw std::invalid_argument("replicate_counts: n must be >= 1");
    if (x_grid.empty()) throw std::invalid_argument("replicate_counts: empty grid");
    for (double x : x_grid) {
        if (!(x > 0.0)) throw std::invalid_argument("replicate_counts: x must be positive");
    }
    if (reps < 1) throw std::invalid_argument("replicate_counts: reps must be >= 1");
    const double level = mode_level(model, n, mode);
    const double n_real = static_cast<double>(n);
    const std::size_t levels = x_grid.size();

    std::vector<std::vector<std::int64_t>> counts(
        levels, std::vector<std::int64_t>(static_cast<std::size_t>(reps), 0));
    for_each_index(reps, policy, [&](std::int64_t r) {
        PathSampler sampler(model,
                            rng::Stream(seed, kernel_salt::counts,
                                        static_cast<std::uint64_t>(r)));
        std::vector<std::int64_t> local(levels, 0);
        for (std::int64_t j = 1; j <= n; ++j) {
            const double v = sampler.next();
            if (mode == ProcessMode::exceedance) {
                if (v > level) {
                    const double pos = static_cast<double>(j) / n_real;
                    for (std::size_t i = 0; i < levels; ++i) {
                        if (pos > x_grid[i]) ++local[i];
                    }
                }
            } else {
                const double m = std::abs(v);
                for (std::size_t i = 0; i < levels; ++i) {
                    if (m > x_grid[i] * level) ++local[i];
                }
            }
        }
        for (std::size_t i = 0; i < levels; ++i) {
            counts[i][static_cast<std::size_t>(r)] = local[i];
        }
    });
    return counts;
}

std::vector<std::int64_t> replicate_counts(const SequenceModel& model, std::int64_t n,
                                           ProcessMode mode, double x, std::int64_t reps,
                                           std::uint64_t seed, const ExecPolicy& policy) {
    return replicate_counts_grid(model, n, mode, {x}, reps, seed, policy).front();
}

}  // namespace cluster_limit
