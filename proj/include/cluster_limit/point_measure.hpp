#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <vector>

#include "cluster_limit/interval.hpp"
#include "cluster_limit/space.hpp"
#include "cluster_limit/test_function.hpp"

namespace cluster_limit {

/// Finite integer-valued point measure on a SpaceSpec. Atoms are kept in
/// canonical form: strictly sorted locations, multiplicities >= 1, equal
/// locations merged by exact floating equality. Immutable after construction;
/// the empty atom list is the null measure.
class PointMeasure {
  public:
    struct Atom {
        double location;
        std::int64_t multiplicity;
        bool operator==(const Atom&) const = default;
    };

    PointMeasure() = default;  // null measure on the punctured line
    explicit PointMeasure(SpaceSpec space) : space_(space) {}
    PointMeasure(SpaceSpec space, std::vector<Atom> atoms);

    static PointMeasure dirac(SpaceSpec space, double location, std::int64_t multiplicity = 1) {
        return PointMeasure(space, {{location, multiplicity}});
    }

    const SpaceSpec& space() const { return space_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    bool is_null() const { return atoms_.empty(); }
    std::int64_t total_count() const;

    /// Total multiplicity carried by B. B's endpoints must lie in the closure
    /// of the space (infinite sentinels allowed only on unbounded spaces).
    std::int64_t count(const IntervalUnion& b) const;

    /// Largest atom modulus; undefined (throws) on the null measure.
    double sup_modulus() const;

    /// True iff the measure has a point of modulus strictly greater than x.
    bool exceeds_modulus(double x) const;

    /// Integral of f against the measure.
    double pair(const TestFunction& f) const;

    /// Atom locations multiplied by factor > 0. If a rescaled atom leaves a
    /// bounded space this is a domain error; leaving an unbounded space
    /// through the inner puncture retargets the result to the same-sided
    /// space with inner bound 0.
    PointMeasure rescaled(double factor) const;

    /// Measure scaled by 1 / sup_modulus: the canonical shape with no atom
    /// beyond modulus 1 and at least one atom at +-1.
    PointMeasure normalized_by_max() const;

    /// Membership in the normalized-shape class: nothing beyond modulus 1
    /// and at least one atom at exactly +-1.
    bool is_normalized_shape() const;

    bool operator==(const PointMeasure&) const = default;

    void to_json(nlohmann::json& j) const;
    static PointMeasure from_json(const nlohmann::json& j);

  private:
    SpaceSpec space_;
    std::vector<Atom> atoms_;
};

/// Multiset union of atoms; counts add on every set. Spaces must agree.
PointMeasure superpose(const PointMeasure& a, const PointMeasure& b);

}  // namespace cluster_limit
