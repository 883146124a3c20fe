#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace cluster_limit {

/// One interval on the extended real line. Endpoints may be +-infinity;
/// openness is tracked per endpoint so half-open conventions like (a,b]
/// survive set algebra.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = false;
    bool hi_closed = true;

    static Interval open_closed(double lo, double hi) { return {lo, hi, false, true}; }
    static Interval closed_open(double lo, double hi) { return {lo, hi, true, false}; }
    static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
    static Interval open(double lo, double hi) { return {lo, hi, false, false}; }

    bool empty() const {
        if (lo > hi) return true;
        if (lo == hi) return !(lo_closed && hi_closed);
        return false;
    }

    bool contains(double y) const {
        if (y < lo || y > hi) return false;
        if (y == lo && !lo_closed) return false;
        if (y == hi && !hi_closed) return false;
        return true;
    }

    std::string str() const;
};

/// Finite union of intervals. This is the only Borel family the toolkit
/// evaluates point measures against.
struct IntervalUnion {
    std::vector<Interval> parts;

    IntervalUnion() = default;
    explicit IntervalUnion(Interval one) : parts{one} {}
    explicit IntervalUnion(std::vector<Interval> many) : parts(std::move(many)) {}

    bool contains(double y) const {
        for (const auto& part : parts) {
            if (part.contains(y)) return true;
        }
        return false;
    }

    bool empty() const {
        for (const auto& part : parts) {
            if (!part.empty()) return false;
        }
        return true;
    }

    std::string str() const;
};

inline std::string Interval::str() const {
    auto fmt = [](double v) {
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        return std::to_string(v);
    };
    return std::string(lo_closed ? "[" : "(") + fmt(lo) + "," + fmt(hi) + (hi_closed ? "]" : ")");
}

inline std::string IntervalUnion::str() const {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += " u ";
        out += parts[i].str();
    }
    return out.empty() ? "{}" : out;
}

}  // namespace cluster_limit
