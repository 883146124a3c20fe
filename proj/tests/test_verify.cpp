#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "cluster_limit/verify.hpp"

using namespace cluster_limit;

namespace {

const auto kMm2 = SequenceModel::moving_max(2, 1.0);
const auto kMm2Limit =
    CanonicalMeasure::compound_poisson_uniform(0.5, ClusterSizeDist::dirac(2));

}  // namespace

TEST_CASE("total variation distance") {
    const Pmf p{{1, 0.5}, {2, 0.5}};
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(Pmf{{1, 1.0}}, Pmf{{2, 1.0}}) == 2.0);
    CHECK_THROWS_AS(tv_distance(Pmf{{1, 0.9}}, p), std::invalid_argument);
    CHECK_THROWS_AS(tv_distance(Pmf{{0, 1.0}}, p), std::invalid_argument);

    // symmetry and triangle inequality on random triples
    rng::Stream stream(404);
    for (int trial = 0; trial < 50; ++trial) {
        auto random_pmf = [&] {
            Pmf out;
            double total = 0.0;
            std::vector<double> raw;
            for (int k = 1; k <= 4; ++k) {
                raw.push_back(stream.uniform_open());
                total += raw.back();
            }
            for (int k = 1; k <= 4; ++k) out[k] = raw[static_cast<std::size_t>(k - 1)] / total;
            return out;
        };
        const Pmf a = random_pmf(), b = random_pmf(), c = random_pmf();
        CHECK(tv_distance(a, b) == doctest::Approx(tv_distance(b, a)));
        CHECK(tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-12);
    }
}

TEST_CASE("condition (a): moving max against its compound Poisson limit") {
    const auto report = check_condition_a(kMm2, kMm2Limit, {20000, 50000}, {0.2, 0.5, 0.8},
                                          ProcessMode::exceedance, BlockRule::sqrt_n, 0, 400,
                                          1001, Tolerance{});
    CHECK(report.global_pass());
    CHECK(report.rows.size() == 6);
    for (const auto& row : report.rows) {
        CHECK(row.check == "condition_a");
        CHECK(row.target == doctest::Approx(0.5 * (1.0 - std::stod(row.label.substr(2)))));
    }
    CHECK(report.metadata.contains("sup_statistic"));
}

TEST_CASE("condition (a): a canonical with no mass at the level is rejected") {
    // scaled-mode moving max has mass beyond x = 1.2; the compound Poisson
    // limit has none there, so the check must fail.
    const auto report =
        check_condition_a(kMm2, kMm2Limit, {20000}, {1.2}, ProcessMode::scaled,
                          BlockRule::sqrt_n, 0, 400, 1002, Tolerance{});
    CHECK_FALSE(report.global_pass());
}

TEST_CASE("condition (b) agrees with condition (a) for the always event") {
    const BlockPlan plan = BlockPlan::with_rule(20000, BlockRule::sqrt_n);
    const auto rb =
        check_condition_b(kMm2, kMm2Limit, plan, 0.3, {ClusterEvent::always()},
                          ProcessMode::exceedance, 300, 1003, Tolerance{});
    const auto ra = check_condition_a(kMm2, kMm2Limit, {20000}, {0.3}, ProcessMode::exceedance,
                                      BlockRule::sqrt_n, 0, 300, 1003, Tolerance{});
    REQUIRE(rb.rows.size() == 1);
    REQUIRE(ra.rows.size() == 1);
    CHECK(rb.rows[0].statistic == ra.rows[0].statistic);
    CHECK(rb.rows[0].ci_lo == ra.rows[0].ci_lo);
    CHECK(rb.rows[0].target == doctest::Approx(ra.rows[0].target));
}

TEST_CASE("condition (b): events with and without limit mass") {
    const BlockPlan plan = BlockPlan::with_rule(50000, BlockRule::sqrt_n);
    const auto report = check_condition_b(
        kMm2, kMm2Limit, plan, 0.3,
        {ClusterEvent::total_count(1), ClusterEvent::total_count(2),
         ClusterEvent::total_count(3)},
        ProcessMode::exceedance, 600, 1004, Tolerance{});
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].target == 0.0);
    CHECK(report.rows[1].target == doctest::Approx(0.35));
    CHECK(report.rows[2].target == 0.0);
    CHECK(report.global_pass());

    CHECK_THROWS_AS(check_condition_b(kMm2, kMm2Limit, plan, 1.5, {ClusterEvent::always()},
                                      ProcessMode::exceedance, 300, 1004, Tolerance{}),
                    std::invalid_argument);
}

TEST_CASE("laplace check: zero function passes trivially, panel at small scale") {
    const auto report = check_laplace(kMm2, kMm2Limit, {TestFunction::zero()}, {10000},
                                      ProcessMode::exceedance, BlockRule::sqrt_n, 0, 200, 1005,
                                      Tolerance{});
    CHECK(report.global_pass());
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].statistic == 1.0);
    CHECK(report.rows[0].target == 1.0);
    CHECK(report.rows[1].statistic == 0.0);
    CHECK(report.rows[1].target == 0.0);

    Tolerance loose;
    loose.abs_probability = 0.03;
    const auto panel_report =
        check_laplace(kMm2, kMm2Limit, default_panel(), {50000}, ProcessMode::exceedance,
                      BlockRule::sqrt_n, 0, 500, 1006, loose);
    CHECK(panel_report.global_pass());
}

TEST_CASE("poisson baseline: iid passes, moving max is over-dispersed") {
    Tolerance tol;
    tol.rel_mass = 0.10;  // small-scale unit test, wider mass slack
    const auto iid = SequenceModel::iid_pareto(1.0, 1.0);
    const auto good = check_poisson_iid(iid, {20000}, {1.0, 2.0}, 400, 1007, tol);
    CHECK(good.global_pass());

    const auto bad = check_poisson_iid(kMm2, {20000}, {1.0}, 400, 1007, tol);
    CHECK_FALSE(bad.global_pass());
    CHECK(bad.metadata.contains("warning"));
    bool gof_failed = false;
    for (const auto& row : bad.rows) {
        if (row.check == "poisson_gof" && !row.pass) gof_failed = true;
    }
    CHECK(gof_failed);
}

TEST_CASE("power: wrong canonical parameters are detected") {
    // wrong rate (a = 1 instead of 0.5)
    const auto wrong_rate =
        CanonicalMeasure::compound_poisson_uniform(1.0, ClusterSizeDist::dirac(2));
    const auto ra = check_condition_a(kMm2, wrong_rate, {50000}, {0.2, 0.5, 0.8},
                                      ProcessMode::exceedance, BlockRule::sqrt_n, 0, 500, 1008,
                                      Tolerance{});
    CHECK_FALSE(ra.global_pass());

    // wrong multiplicity law (pi_1 = 1 instead of pi_2 = 1)
    const auto wrong_pi =
        CanonicalMeasure::compound_poisson_uniform(0.5, ClusterSizeDist::dirac(1));
    const auto rb = check_condition_b(kMm2, wrong_pi, BlockPlan::with_rule(50000, BlockRule::sqrt_n),
                                      0.3, {ClusterEvent::total_count(1), ClusterEvent::total_count(2)},
                                      ProcessMode::exceedance, 500, 1008, Tolerance{});
    CHECK_FALSE(rb.global_pass());
}

TEST_CASE("reports serialize, recompute, and export plot data") {
    const auto report = check_condition_a(kMm2, kMm2Limit, {20000}, {0.5},
                                          ProcessMode::exceedance, BlockRule::sqrt_n, 0, 300,
                                          1009, Tolerance{});
    const auto j = report.to_json();
    const auto back = ConvergenceReport::from_json(j);
    CHECK(back.to_json().dump() == j.dump());
    for (const auto& row : back.rows) {
        CHECK(row.pass == row.evaluate());
    }

    std::ostringstream csv;
    report.write_plotdata_csv(csv);
    std::int64_t lines = 0;
    for (char ch : csv.str()) {
        if (ch == '\n') ++lines;
    }
    CHECK(lines == static_cast<std::int64_t>(report.rows.size()) + 1);
}

TEST_CASE("default fixtures") {
    const auto panel = default_panel();
    CHECK(panel.size() == 5);
    for (const auto& f : panel) {
        CHECK(f.inner_gap() >= 0.15);
        CHECK(f.max_value() > 0.0);
    }
    const auto events = default_events();
    CHECK(events.size() == 6);
    CHECK(events.front().total().has_value());
    CHECK_FALSE(events.back().terms().empty());
}
