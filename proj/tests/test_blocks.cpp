#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cluster_limit/blocks.hpp"
#include "cluster_limit/blocks_reference.hpp"
#include "support/oracles.hpp"

using namespace cluster_limit;

TEST_CASE("block plans partition and discard the remainder") {
    const BlockPlan even = BlockPlan::make(4, 2);
    CHECK(even.block_count == 2);
    const BlockPlan odd = BlockPlan::make(5, 2);
    CHECK(odd.block_count == 2);
    CHECK_THROWS_AS(BlockPlan::make(4, 5), std::invalid_argument);
    CHECK(BlockPlan::with_rule(100000, BlockRule::sqrt_n).block_length == 317);
    CHECK(BlockPlan::with_rule(1000, BlockRule::two_thirds).block_length == 100);
}

TEST_CASE("exceedance process places atoms at normalized times") {
    const std::vector<double> path{0.0, 5.0, 0.0, 7.0};
    const auto mu = exceedance_process(path, 1.0);
    CHECK(mu.atoms() == std::vector<PointMeasure::Atom>{{0.5, 1}, {1.0, 1}});

    CHECK(exceedance_process(path, 10.0).is_null());
    CHECK(exceedance_process(path, -1.0).total_count() == 4);
}

TEST_CASE("scaled process rescales values and merges duplicates") {
    const std::vector<double> path{2.0, -4.0};
    const auto mu = scaled_process(path, 2.0);
    CHECK(mu.atoms() == std::vector<PointMeasure::Atom>{{-2.0, 1}, {1.0, 1}});

    const std::vector<double> same{3.0, 3.0, -1.0};
    CHECK(scaled_process(same, 1.0).atoms() ==
          std::vector<PointMeasure::Atom>{{-1.0, 1}, {3.0, 2}});

    const std::vector<double> zero{1.0, 0.0};
    CHECK_THROWS_AS(scaled_process(zero, 1.0), std::domain_error);

    // counting beyond x matches the direct count
    const std::vector<double> longer{2.0, -4.0, 0.5, 8.0, -0.25};
    const auto nu = scaled_process(longer, 2.0);
    CHECK(nu.count(nu.space().modulus_above(0.9)) == 3);
}

TEST_CASE("split then superpose equals restrict") {
    const std::vector<double> path{0.5, 3.0, 0.1, 4.0, 9.0};
    const BlockPlan plan = BlockPlan::make(5, 2);
    const auto summaries = split_blocks(path, ProcessMode::exceedance, 1.0, plan);
    REQUIRE(summaries.size() == 2);
    CHECK(summaries[0].sub_process.atoms() == std::vector<PointMeasure::Atom>{{0.4, 1}});
    CHECK(summaries[1].sub_process.atoms() == std::vector<PointMeasure::Atom>{{0.8, 1}});

    // index 5 (value 9.0) is discarded: total count over blocks is 2
    PointMeasure total(SpaceSpec::unit_interval());
    for (const auto& s : summaries) total = superpose(total, s.sub_process);
    CHECK(total.total_count() == 2);

    // block_max is the sup modulus of the sub-process, and absent iff null
    for (const auto& s : summaries) {
        if (s.sub_process.is_null()) {
            CHECK_FALSE(s.block_max.has_value());
            CHECK(s.exceedance_count == 0);
        } else {
            CHECK(*s.block_max == s.sub_process.sup_modulus());
            CHECK(s.exceedance_count >= 1);
        }
    }
}

TEST_CASE("split blocks covers the whole path when lengths divide") {
    const auto model = SequenceModel::iid_pareto(1.0, 0.5);
    const auto path = sample_path(model, 64, 12);
    const BlockPlan plan = BlockPlan::make(64, 8);
    const auto summaries = split_blocks(path, ProcessMode::scaled, 2.0, plan);
    PointMeasure total(SpaceSpec::punctured_line());
    for (const auto& s : summaries) total = superpose(total, s.sub_process);
    CHECK(total == scaled_process(path, 2.0));
}

TEST_CASE("fused condition_a kernel equals the structural reference") {
    const auto mm = SequenceModel::moving_max(2, 1.0);
    const BlockPlan plan = BlockPlan::make(4000, 63);
    const auto events = std::vector<ClusterEvent>{
        ClusterEvent::always(), ClusterEvent::total_count(2),
        ClusterEvent::count_at_least(Interval::open_closed(0.5, 1.0), 1)};

    for (ProcessMode mode : {ProcessMode::exceedance, ProcessMode::scaled}) {
        const auto fused = block_event_sweep(mm, plan, mode, 0.4, events, 120, 31,
                                             ExecPolicy::serial());
        const auto ref = reference::block_event_sweep(mm, plan, mode, 0.4, events, 120, 31);
        CHECK(fused.base.successes == ref.base.successes);
        CHECK(fused.base.statistic == ref.base.statistic);
        REQUIRE(fused.events.size() == ref.events.size());
        for (std::size_t e = 0; e < events.size(); ++e) {
            CHECK(fused.events[e].successes == ref.events[e].successes);
            CHECK(fused.events[e].statistic == ref.events[e].statistic);
        }
    }
}

TEST_CASE("fused cluster kernels equal their references") {
    const auto mm = SequenceModel::moving_max(2, 1.0);
    const BlockPlan plan = BlockPlan::make(3000, 50);

    const auto fused_sizes = cluster_sizes(mm, plan, 150, 77, ExecPolicy::serial());
    const auto ref_sizes = reference::cluster_sizes(mm, plan, 150, 77);
    CHECK(fused_sizes.pmf == ref_sizes.pmf);
    CHECK(fused_sizes.qualifying_blocks == ref_sizes.qualifying_blocks);

    const auto fused_shapes = cluster_shapes(mm, plan, 0.5, 200, 77, ExecPolicy::serial());
    const auto ref_shapes = reference::cluster_shapes(mm, plan, 0.5, 200, 77);
    REQUIRE(fused_shapes.size() == ref_shapes.size());
    for (std::size_t i = 0; i < fused_shapes.size(); ++i) {
        CHECK(fused_shapes[i] == ref_shapes[i]);
    }

    const auto f = TestFunction::trapezoid(0.2, 0.8, 1.0, 0.05);
    const auto fused_laplace =
        laplace_functionals(mm, plan, ProcessMode::exceedance, f, 150, 77, ExecPolicy::serial());
    const auto ref_laplace =
        reference::laplace_functionals(mm, plan, ProcessMode::exceedance, f, 150, 77);
    CHECK(fused_laplace.empirical_laplace == ref_laplace.empirical_laplace);
    CHECK(fused_laplace.block_functional == ref_laplace.block_functional);
}

TEST_CASE("condition_a at unit blocks equals the marginal tail frequency") {
    const auto model = SequenceModel::iid_pareto(1.0, 1.0);
    const std::int64_t n = 50000;
    const BlockPlan plan = BlockPlan::make(n, 1);
    const double x = 2.0;
    const auto stat = condition_a_stat(model, plan, ProcessMode::scaled, x, 100, 13);
    // n * P(|xi| > x a_n) = x^-1, cross-checked against the analytic tail
    const double target =
        static_cast<double>(n) * model.tail(x * model.scale_a(n).value).two_sided;
    CHECK(target == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(stat.ci.lo <= target);
    CHECK(stat.ci.hi >= target);

    // monotone in x on the same samples
    const auto stat4 = condition_a_stat(model, plan, ProcessMode::scaled, 4.0, 100, 13);
    CHECK(stat4.statistic <= stat.statistic);
}

TEST_CASE("cluster sizes: iid blocks match the binomial oracle") {
    const auto model = SequenceModel::iid_pareto(1.0, 1.0);
    const std::int64_t n = 100000;
    const BlockPlan plan = BlockPlan::make(n, 1000);
    const auto table = cluster_sizes(model, plan, 300, 41);

    const double p = model.tail(model.level_u(n).value).right;
    const auto oracle = test_oracles::binomial_cluster_pmf(plan.block_length, p, 6);
    // compare the head of the conditional law
    for (std::int64_t k = 1; k <= 3; ++k) {
        const auto it = table.pmf.find(k);
        const double empirical = it == table.pmf.end() ? 0.0 : it->second;
        CHECK(std::abs(empirical - oracle[static_cast<std::size_t>(k - 1)]) < 0.05);
    }
    double sum = 0.0;
    for (const auto& [k, v] : table.pmf) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cluster sizes: moving max concentrates on pairs") {
    const auto mm = SequenceModel::moving_max(2, 1.0);
    const BlockPlan plan = BlockPlan::make(200000, 450);
    const auto table = cluster_sizes(mm, plan, 400, 43);
    const auto it = table.pmf.find(2);
    REQUIRE(it != table.pmf.end());
    CHECK(it->second > 0.9);
}

TEST_CASE("cluster shapes are normalized and reflect the cluster structure") {
    const auto mm = SequenceModel::moving_max(2, 1.0);
    const BlockPlan plan = BlockPlan::make(100000, 316);
    const auto shapes = cluster_shapes(mm, plan, 1.0, 300, 47);
    REQUIRE(!shapes.empty());
    std::int64_t pair_shapes = 0;
    for (const auto& shape : shapes) {
        CHECK(shape.is_normalized_shape());
        if (shape.atoms().size() == 1 && shape.atoms().front().location == 1.0 &&
            shape.atoms().front().multiplicity == 2) {
            ++pair_shapes;
        }
    }
    // modal shape: two equal maxima per cluster
    CHECK(pair_shapes > static_cast<std::int64_t>(shapes.size()) / 2);

    // iid: singleton shapes dominate
    const auto iid = SequenceModel::iid_pareto(1.0, 1.0);
    const auto iid_shapes = cluster_shapes(iid, plan, 1.0, 300, 47);
    std::int64_t singles = 0;
    for (const auto& shape : iid_shapes) {
        if (shape.total_count() == 1) ++singles;
    }
    CHECK(singles > static_cast<std::int64_t>(iid_shapes.size()) * 9 / 10);
}

TEST_CASE("extremal index estimates for the documented families") {
    const auto iid = SequenceModel::iid_pareto(1.0, 1.0);
    const auto est = extremal_index(iid, BlockPlan::make(100000, 316), 400, 53);
    CHECK(est.theta_hat > 0.9);
    CHECK(est.theta_hat < 1.1);

    const auto mm = SequenceModel::moving_max(2, 1.0);
    const auto est2 = extremal_index(mm, BlockPlan::make(100000, 316), 400, 53);
    CHECK(est2.theta_hat > 0.4);
    CHECK(est2.theta_hat < 0.6);
    CHECK(*est2.known_theta == doctest::Approx(0.5));
}

TEST_CASE("ai gap: zero function and exact iid factorization") {
    const auto iid = SequenceModel::iid_pareto(1.0, 1.0);
    const BlockPlan plan = BlockPlan::make(10000, 100);  // k * r = n exactly
    const auto zero_gap =
        ai_gap(iid, plan, ProcessMode::exceedance, TestFunction::zero(), 200, 61);
    CHECK(zero_gap.gap == 0.0);
    CHECK(zero_gap.se == 0.0);

    const auto f = TestFunction::trapezoid(0.2, 0.8, 1.0, 0.05);
    const auto gap = ai_gap(iid, plan, ProcessMode::exceedance, f, 400, 61);
    CHECK(gap.ci.lo <= 0.0);
    CHECK(gap.ci.hi >= 0.0);
}

TEST_CASE("ai gap shrinks with n for the moving maximum") {
    // Short blocks raise the boundary-splitting signal (~ 1/(2 r_n)) well
    // above the estimator noise at these replicate counts.
    const auto mm = SequenceModel::moving_max(2, 1.0);
    const auto f = TestFunction::trapezoid(0.2, 0.8, 1.0, 0.05);
    const auto small =
        ai_gap(mm, BlockPlan::make(10000, 22), ProcessMode::exceedance, f, 25000, 67);
    const auto large =
        ai_gap(mm, BlockPlan::make(100000, 47), ProcessMode::exceedance, f, 12000, 67);
    CHECK(large.gap < small.gap);
    CHECK(large.gap < 0.02);
}

TEST_CASE("replicate counts: levels beyond the data give zero counts") {
    const auto model = SequenceModel::iid_pareto(1.0, 1.0);
    const auto counts = replicate_counts(model, 1000, ProcessMode::scaled, 1e9, 50, 71);
    for (auto c : counts) CHECK(c == 0);
}

TEST_CASE("block summary CSV export") {
    const std::vector<double> path{0.5, 3.0, 0.1, 4.0};
    const auto summaries = split_blocks(path, ProcessMode::exceedance, 1.0, BlockPlan::make(4, 2));
    std::vector<std::pair<std::int64_t, BlockSummary>> rows;
    for (const auto& s : summaries) rows.emplace_back(0, s);
    std::ostringstream out;
    write_block_summaries_csv(out, rows);
    CHECK(out.str() == "replicate,i,block_max,exceedance_count\n0,1,0.5,1\n0,2,1,1\n");
}

TEST_CASE("kernel argument validation") {
    const auto model = SequenceModel::iid_pareto(1.0, 1.0);
    const BlockPlan plan = BlockPlan::make(1000, 10);
    CHECK_THROWS_AS(condition_a_stat(model, plan, ProcessMode::scaled, 1.0, 50, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(condition_a_stat(model, plan, ProcessMode::scaled, -1.0, 200, 1),
                    std::invalid_argument);
    // no qualifying blocks: threshold far beyond any value
    CHECK_THROWS_AS(cluster_shapes(model, plan, 1e12, 100, 1), std::runtime_error);
}
