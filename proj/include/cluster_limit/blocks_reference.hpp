#pragma once

#include "cluster_limit/blocks.hpp"

namespace cluster_limit::reference {

/// Structural counterparts of the fused kernels in blocks.hpp: they
/// materialize each replicate path, build the per-block point measures with
/// split_blocks, and evaluate events and functionals through the PointMeasure
/// API. Serial by construction and deliberately slow; tests pin the fused
/// kernels to these bit for bit, and the benchmark target compares the two.

BlockEventSweep block_event_sweep(const SequenceModel& model, const BlockPlan& plan,
                                  ProcessMode mode, double x,
                                  const std::vector<ClusterEvent>& events, std::int64_t reps,
                                  std::uint64_t seed);

ClusterSizeTable cluster_sizes(const SequenceModel& model, const BlockPlan& plan,
                               std::int64_t reps, std::uint64_t seed);

LaplaceFunctionalStat laplace_functionals(const SequenceModel& model, const BlockPlan& plan,
                                          ProcessMode mode, const TestFunction& f,
                                          std::int64_t reps, std::uint64_t seed);

std::vector<PointMeasure> cluster_shapes(const SequenceModel& model, const BlockPlan& plan,
                                         double x, std::int64_t reps, std::uint64_t seed,
                                         double shape_floor = 0.05,
                                         std::int64_t max_shapes = 1000);

}  // namespace cluster_limit::reference
