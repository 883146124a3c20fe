#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>

#include "cluster_limit/point_measure.hpp"
#include "cluster_limit/rng.hpp"

using namespace cluster_limit;

namespace {

PointMeasure on_line(std::vector<PointMeasure::Atom> atoms) {
    return PointMeasure(SpaceSpec::punctured_line(), std::move(atoms));
}

}  // namespace

TEST_CASE("space membership follows the punctured interval form") {
    const SpaceSpec unit = SpaceSpec::unit_interval();
    CHECK(unit.contains(0.5));
    CHECK(unit.contains(1.0));
    CHECK_FALSE(unit.contains(0.0));
    CHECK_FALSE(unit.contains(1.0000001));
    CHECK_FALSE(unit.contains(-0.5));

    const SpaceSpec two = SpaceSpec::two_sided(0.25, 2.0);
    CHECK(two.contains(0.5));
    CHECK(two.contains(-0.5));
    CHECK(two.contains(2.0));
    CHECK(two.contains(-2.0));
    CHECK_FALSE(two.contains(0.25));
    CHECK_FALSE(two.contains(-0.25));
    CHECK_FALSE(two.contains(3.0));

    const SpaceSpec line = SpaceSpec::punctured_line();
    CHECK(line.contains(1e300));
    CHECK(line.contains(-1e-300));
    CHECK_FALSE(line.contains(0.0));
    CHECK_FALSE(line.contains(std::numeric_limits<double>::infinity()));
}

TEST_CASE("space validation") {
    CHECK_THROWS_AS(SpaceSpec::two_sided(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SpaceSpec::two_sided(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SpaceSpec::two_sided(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("atoms at +-infinity or outside the space are rejected") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(on_line({{inf, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(on_line({{-inf, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(on_line({{0.0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(on_line({{1.0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(PointMeasure(SpaceSpec::unit_interval(), {{1.5, 1}}), std::invalid_argument);
}

TEST_CASE("count on modulus sets") {
    const auto mu = on_line({{0.5, 1}, {-0.7, 1}});
    CHECK(mu.count(mu.space().modulus_above(0.6)) == 1);
    CHECK(mu.count(mu.space().modulus_above(0.8)) == 0);
    CHECK(mu.count(mu.space().modulus_above(0.1)) == 2);

    const PointMeasure null_measure(SpaceSpec::punctured_line());
    CHECK(null_measure.count(null_measure.space().modulus_above(0.5)) == 0);
}

TEST_CASE("count validates interval endpoints against the space closure") {
    const PointMeasure mu(SpaceSpec::unit_interval(), {{0.5, 1}});
    CHECK_THROWS_AS(mu.count(IntervalUnion(Interval::open_closed(0.1, 2.0))),
                    std::domain_error);
    CHECK_THROWS_AS(mu.count(IntervalUnion(Interval::open_closed(-0.5, 0.5))),
                    std::domain_error);
    CHECK(mu.count(IntervalUnion(Interval::open_closed(0.0, 1.0))) == 1);
}

TEST_CASE("sup_modulus and the strict modulus-class predicate") {
    const auto mu = on_line({{0.5, 1}, {-0.7, 1}});
    CHECK(mu.sup_modulus() == 0.7);
    CHECK(on_line({{0.3, 2}}).sup_modulus() == 0.3);

    const PointMeasure null_measure(SpaceSpec::punctured_line());
    CHECK_THROWS_WITH_AS(null_measure.sup_modulus(), "Phi undefined on null measure",
                         std::domain_error);

    CHECK(mu.exceeds_modulus(0.5));
    CHECK_FALSE(mu.exceeds_modulus(0.7));  // strict inequality at the sup
    CHECK_FALSE(null_measure.exceeds_modulus(0.5));
}

TEST_CASE("membership in the modulus class matches counting") {
    rng::Stream stream(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<PointMeasure::Atom> atoms;
        const int k = static_cast<int>(stream.next_u64() % 5);
        for (int i = 0; i < k; ++i) {
            const double loc = (stream.uniform_open() * 4.0 - 2.0);
            if (loc == 0.0) continue;
            atoms.push_back({loc, 1 + static_cast<std::int64_t>(stream.next_u64() % 3)});
        }
        const auto mu = on_line(std::move(atoms));
        const double x = stream.uniform_open() * 2.5;
        if (x <= 0.0) continue;
        CHECK(mu.exceeds_modulus(x) == (mu.count(mu.space().modulus_above(x)) >= 1));
    }
}

TEST_CASE("pair integrates against piecewise-linear functions") {
    const auto f = TestFunction::trapezoid(0.2, 0.8, 3.0, 0.1);
    CHECK(on_line({{0.5, 2}}).pair(f) == 6.0);
    CHECK(PointMeasure(SpaceSpec::punctured_line()).pair(f) == 0.0);
    CHECK(on_line({{0.5, 1}}).pair(TestFunction::zero()) == 0.0);

    // additivity over superposition
    const auto mu1 = on_line({{0.31, 1}, {0.62, 2}});
    const auto mu2 = on_line({{0.45, 3}});
    CHECK(superpose(mu1, mu2).pair(f) == doctest::Approx(mu1.pair(f) + mu2.pair(f)).epsilon(1e-15));

    // vanishing below the inner gap
    const auto small = on_line({{0.15, 5}, {-0.1, 2}});
    CHECK(small.sup_modulus() <= f.inner_gap());
    CHECK(small.pair(f) == 0.0);
}

TEST_CASE("test function validation and shape") {
    CHECK_THROWS_AS(TestFunction({0.1}, {1.0}, 0.2), std::invalid_argument);  // knot in gap
    CHECK_THROWS_AS(TestFunction({0.2}, {1.0}, 0.2), std::invalid_argument);  // nonzero at gap
    CHECK_THROWS_AS(TestFunction({0.3, 0.3}, {0.0, 0.0}, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(TestFunction({0.3}, {-1.0}, 0.2), std::invalid_argument);

    const auto f = TestFunction::trapezoid(0.2, 0.8, 3.0, 0.1);
    CHECK(f(0.1) == 0.0);
    CHECK(f(0.2) == 0.0);
    CHECK(f(0.25) == doctest::Approx(1.5));
    CHECK(f(0.5) == 3.0);
    CHECK(f(0.8) == 0.0);
    CHECK(f(0.95) == 0.0);
    CHECK(f(-0.5) == 0.0);

    const auto ind = TestFunction::indicator_above(0.5, 0.01);
    CHECK(ind(0.5) == 0.0);
    CHECK(ind(0.51) == 1.0);
    CHECK(ind(100.0) == 1.0);  // constant continuation

    const auto both = TestFunction::indicator_modulus_above(0.5, 0.01);
    CHECK(both(-100.0) == 1.0);
    CHECK(both(-0.51) == 1.0);
    CHECK(both(0.3) == 0.0);
    CHECK(both(0.52) == 1.0);
}

TEST_CASE("rescale moves atoms and scales the sup modulus") {
    const auto mu = on_line({{0.5, 1}, {-0.7, 1}});
    const auto doubled = mu.rescaled(2.0);
    CHECK(doubled.atoms() == std::vector<PointMeasure::Atom>{{-1.4, 1}, {1.0, 1}});
    CHECK(mu.rescaled(1.0) == mu);
    CHECK(doubled.sup_modulus() == doctest::Approx(2.0 * mu.sup_modulus()).epsilon(1e-15));

    // round trip is stable to an ulp
    const auto back = doubled.rescaled(0.5);
    REQUIRE(back.atoms().size() == mu.atoms().size());
    for (std::size_t i = 0; i < back.atoms().size(); ++i) {
        CHECK(std::abs(back.atoms()[i].location - mu.atoms()[i].location) <= 1e-12);
        CHECK(back.atoms()[i].multiplicity == mu.atoms()[i].multiplicity);
    }

    // leaving a bounded space is a domain error
    const PointMeasure bounded(SpaceSpec::unit_interval(), {{0.9, 1}});
    CHECK_THROWS_AS(bounded.rescaled(2.0), std::domain_error);

    // leaving an unbounded space through the puncture retargets to inner 0
    const PointMeasure ring(SpaceSpec::two_sided(0.5, std::numeric_limits<double>::infinity()),
                            {{0.6, 1}});
    const auto shrunk = ring.rescaled(0.5);
    CHECK(shrunk.space().inner() == 0.0);
    CHECK(shrunk.atoms().front().location == doctest::Approx(0.3));
}

TEST_CASE("normalize_by_max lands in the normalized-shape class") {
    const auto mu = on_line({{1.0, 1}, {-2.0, 1}});
    const auto shape = mu.normalized_by_max();
    CHECK(shape.atoms() == std::vector<PointMeasure::Atom>{{-1.0, 1}, {0.5, 1}});
    CHECK(shape.is_normalized_shape());

    CHECK(on_line({{0.3, 1}}).normalized_by_max().atoms() ==
          std::vector<PointMeasure::Atom>{{1.0, 1}});

    CHECK_THROWS_AS(PointMeasure(SpaceSpec::punctured_line()).normalized_by_max(),
                    std::domain_error);

    // idempotence
    rng::Stream stream(11);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PointMeasure::Atom> atoms;
        const int k = 1 + static_cast<int>(stream.next_u64() % 4);
        for (int i = 0; i < k; ++i) {
            atoms.push_back({stream.uniform_open() * 3.0 + 0.01, 1});
        }
        const auto once = on_line(std::move(atoms)).normalized_by_max();
        CHECK(once.is_normalized_shape());
        CHECK(once.normalized_by_max() == once);
    }
}

TEST_CASE("superposition merges multiplicities and adds counts") {
    const auto mu = on_line({{0.5, 1}});
    const PointMeasure null_measure(SpaceSpec::punctured_line());
    CHECK(superpose(null_measure, mu) == mu);
    CHECK(superpose(mu, mu).atoms() == std::vector<PointMeasure::Atom>{{0.5, 2}});

    const auto a = on_line({{0.5, 1}, {1.5, 2}});
    const auto b = on_line({{-0.25, 1}, {0.5, 1}});
    const auto both = superpose(a, b);
    const auto set = SpaceSpec::punctured_line().modulus_above(0.4);
    CHECK(both.count(set) == a.count(set) + b.count(set));

    CHECK_THROWS_AS(superpose(mu, PointMeasure(SpaceSpec::unit_interval(), {{0.5, 1}})),
                    std::invalid_argument);
}

TEST_CASE("construction canonicalizes: serialization is order independent") {
    const PointMeasure a(SpaceSpec::punctured_line(),
                         {{0.7, 1}, {-0.3, 2}, {0.7, 2}, {0.1, 1}});
    const PointMeasure b(SpaceSpec::punctured_line(),
                         {{0.1, 1}, {0.7, 3}, {-0.3, 2}});
    nlohmann::json ja, jb;
    a.to_json(ja);
    b.to_json(jb);
    CHECK(ja.dump() == jb.dump());

    // round trip through JSON is the identity
    CHECK(PointMeasure::from_json(ja) == a);
    nlohmann::json jc;
    PointMeasure::from_json(ja).to_json(jc);
    CHECK(jc.dump() == ja.dump());
}

TEST_CASE("space serialization round-trips, including the infinite bound") {
    for (const auto& space : {SpaceSpec::unit_interval(), SpaceSpec::punctured_line(),
                              SpaceSpec::two_sided(0.5, 2.0),
                              SpaceSpec::negative(0.0, std::numeric_limits<double>::infinity())}) {
        nlohmann::json j;
        space.to_json(j);
        CHECK(SpaceSpec::from_json(j) == space);
    }
}
