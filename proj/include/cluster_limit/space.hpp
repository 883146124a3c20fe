#pragma once

#include <nlohmann/json_fwd.hpp>

#include <limits>

#include "cluster_limit/interval.hpp"

namespace cluster_limit {

enum class Side { both, positive, negative };

/// State space for the point measures: a punctured subset of the extended
/// reals of the form [-b,-a) u (a,b], or one of its one-sided variants, with
/// b possibly infinite. Zero is never a member; by modulus the membership
/// condition is always a < |y| <= b on the allowed sign(s).
class SpaceSpec {
  public:
    SpaceSpec() : SpaceSpec(Side::both, 0.0, std::numeric_limits<double>::infinity()) {}
    SpaceSpec(Side side, double inner, double outer);

    static SpaceSpec two_sided(double inner, double outer) { return {Side::both, inner, outer}; }
    static SpaceSpec positive(double inner, double outer) { return {Side::positive, inner, outer}; }
    static SpaceSpec negative(double inner, double outer) { return {Side::negative, inner, outer}; }

    /// (0,1] -- the home of time-normalized exceedance processes.
    static SpaceSpec unit_interval();
    /// [-inf,0) u (0,inf] -- the home of scaled processes and cluster shapes.
    static SpaceSpec punctured_line();

    Side side() const { return side_; }
    double inner() const { return inner_; }
    double outer() const { return outer_; }
    bool unbounded() const { return std::isinf(outer_); }

    bool allows_sign(double y) const {
        if (y > 0) return side_ != Side::negative;
        if (y < 0) return side_ != Side::positive;
        return false;
    }

    /// Membership for finite locations. Infinite arguments return false:
    /// atoms at +-infinity are rejected everywhere.
    bool contains(double y) const {
        if (!std::isfinite(y) || y == 0.0) return false;
        if (!allows_sign(y)) return false;
        const double m = std::abs(y);
        return m > inner_ && m <= outer_;
    }

    /// True when y lies in the closure of E (or is an infinite sentinel on an
    /// unbounded space); used to validate interval endpoints for counting.
    bool closure_contains(double y) const;

    /// {y in E : |y| > x} as a finite union of intervals, clipped to E.
    IntervalUnion modulus_above(double x) const;

    bool operator==(const SpaceSpec& other) const = default;

    void to_json(nlohmann::json& j) const;
    static SpaceSpec from_json(const nlohmann::json& j);

  private:
    Side side_;
    double inner_;
    double outer_;
};

}  // namespace cluster_limit
