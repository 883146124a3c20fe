#include "cluster_limit/space.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace cluster_limit {

SpaceSpec::SpaceSpec(Side side, double inner, double outer) : side_(side), inner_(inner), outer_(outer) {
    if (!(inner >= 0.0) || std::isnan(outer)) {
        throw std::invalid_argument("SpaceSpec: inner bound must satisfy 0 <= a");
    }
    if (!(inner < outer)) {
        throw std::invalid_argument("SpaceSpec: bounds must satisfy a < b");
    }
    if (std::isinf(inner)) {
        throw std::invalid_argument("SpaceSpec: inner bound must be finite");
    }
}

SpaceSpec SpaceSpec::unit_interval() { return {Side::positive, 0.0, 1.0}; }

SpaceSpec SpaceSpec::punctured_line() {
    return {Side::both, 0.0, std::numeric_limits<double>::infinity()};
}

bool SpaceSpec::closure_contains(double y) const {
    if (std::isnan(y)) return false;
    if (std::isinf(y)) return unbounded() && allows_sign(y);
    if (y == 0.0) return inner_ == 0.0;
    if (!allows_sign(y)) return false;
    const double m = std::abs(y);
    return m >= inner_ && m <= outer_;
}

IntervalUnion SpaceSpec::modulus_above(double x) const {
    const double cut = std::max(x, inner_);
    IntervalUnion out;
    if (cut >= outer_) return out;
    if (side_ != Side::negative) {
        out.parts.push_back(Interval::open_closed(cut, outer_));
    }
    if (side_ != Side::positive) {
        out.parts.push_back(Interval::closed_open(-outer_, -cut));
    }
    return out;
}

void SpaceSpec::to_json(nlohmann::json& j) const {
    const char* side = side_ == Side::both ? "both" : side_ == Side::positive ? "positive" : "negative";
    j = nlohmann::json{{"side", side}, {"a", inner_}};
    if (unbounded()) {
        j["b"] = "inf";
    } else {
        j["b"] = outer_;
    }
}

SpaceSpec SpaceSpec::from_json(const nlohmann::json& j) {
    const std::string side_str = j.at("side").get<std::string>();
    Side side;
    if (side_str == "both") {
        side = Side::both;
    } else if (side_str == "positive") {
        side = Side::positive;
    } else if (side_str == "negative") {
        side = Side::negative;
    } else {
        throw std::invalid_argument("SpaceSpec: unknown side '" + side_str + "'");
    }
    const double a = j.at("a").get<double>();
    double b;
    if (j.at("b").is_string()) {
        if (j.at("b").get<std::string>() != "inf") {
            throw std::invalid_argument("SpaceSpec: b must be a number or \"inf\"");
        }
        b = std::numeric_limits<double>::infinity();
    } else {
        b = j.at("b").get<double>();
    }
    return {side, a, b};
}

}  // namespace cluster_limit
