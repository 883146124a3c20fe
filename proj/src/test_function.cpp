#include "cluster_limit/test_function.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cluster_limit {

TestFunction::TestFunction(std::vector<double> knots, std::vector<double> values, double inner_gap,
                           std::string name)
    : user_knots_(std::move(knots)),
      user_values_(std::move(values)),
      inner_gap_(inner_gap),
      max_value_(0.0),
      name_(std::move(name)) {
    if (!(inner_gap_ > 0.0) || !std::isfinite(inner_gap_)) {
        throw std::invalid_argument("TestFunction: inner gap must be a positive real");
    }
    if (user_knots_.size() != user_values_.size()) {
        throw std::invalid_argument("TestFunction: knots and values must have equal length");
    }
    for (std::size_t i = 0; i < user_knots_.size(); ++i) {
        const double k = user_knots_[i];
        const double v = user_values_[i];
        if (!std::isfinite(k)) throw std::invalid_argument("TestFunction: knots must be finite");
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("TestFunction: values must be finite and >= 0");
        }
        if (i > 0 && !(user_knots_[i - 1] < k)) {
            throw std::invalid_argument("TestFunction: knots must be strictly increasing");
        }
        if (std::abs(k) < inner_gap_) {
            throw std::invalid_argument("TestFunction: knot inside the inner gap");
        }
        if (std::abs(k) == inner_gap_ && v != 0.0) {
            throw std::invalid_argument("TestFunction: knot on the gap boundary must be zero");
        }
        max_value_ = std::max(max_value_, v);
    }

    // Internal grid: user knots plus zero knots at +-inner_gap, so linear
    // interpolation never leaks across the gap.
    grid_ = user_knots_;
    grid_values_ = user_values_;
    auto insert_knot = [&](double where) {
        auto it = std::lower_bound(grid_.begin(), grid_.end(), where);
        if (it != grid_.end() && *it == where) return;
        const auto idx = static_cast<std::size_t>(it - grid_.begin());
        grid_.insert(it, where);
        grid_values_.insert(grid_values_.begin() + static_cast<std::ptrdiff_t>(idx), 0.0);
    };
    insert_knot(-inner_gap_);
    insert_knot(inner_gap_);
}

TestFunction TestFunction::zero(double inner_gap) { return TestFunction({}, {}, inner_gap, "zero"); }

TestFunction TestFunction::trapezoid(double lo, double hi, double height, double ramp,
                                     std::string name) {
    if (!(0.0 < lo && lo < hi)) throw std::invalid_argument("trapezoid: need 0 < lo < hi");
    if (!(ramp > 0.0 && 2.0 * ramp < hi - lo)) {
        throw std::invalid_argument("trapezoid: ramp must satisfy 0 < 2*ramp < hi - lo");
    }
    return TestFunction({lo, lo + ramp, hi - ramp, hi}, {0.0, height, height, 0.0}, lo,
                        std::move(name));
}

TestFunction TestFunction::indicator_above(double x, double ramp) {
    if (!(x > 0.0 && ramp > 0.0)) throw std::invalid_argument("indicator_above: need x, ramp > 0");
    return TestFunction({x, x + ramp}, {0.0, 1.0}, x, "indicator_above");
}

TestFunction TestFunction::indicator_modulus_above(double x, double ramp) {
    if (!(x > 0.0 && ramp > 0.0)) {
        throw std::invalid_argument("indicator_modulus_above: need x, ramp > 0");
    }
    return TestFunction({-x - ramp, -x, x, x + ramp}, {1.0, 0.0, 0.0, 1.0}, x,
                        "indicator_modulus_above");
}

double TestFunction::operator()(double y) const {
    if (std::isnan(y)) throw std::invalid_argument("TestFunction: NaN argument");
    if (std::abs(y) <= inner_gap_) return 0.0;
    if (y <= grid_.front()) return grid_values_.front();
    if (y >= grid_.back()) return grid_values_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), y);
    const auto hi = static_cast<std::size_t>(it - grid_.begin());
    const std::size_t lo = hi - 1;
    const double span = grid_[hi] - grid_[lo];
    const double t = (y - grid_[lo]) / span;
    return grid_values_[lo] + t * (grid_values_[hi] - grid_values_[lo]);
}

void TestFunction::to_json(nlohmann::json& j) const {
    j = nlohmann::json{{"knots", user_knots_},
                       {"values", user_values_},
                       {"inner_gap", inner_gap_},
                       {"name", name_}};
}

TestFunction TestFunction::from_json(const nlohmann::json& j) {
    return TestFunction(j.at("knots").get<std::vector<double>>(),
                        j.at("values").get<std::vector<double>>(),
                        j.at("inner_gap").get<double>(),
                        j.value("name", ""));
}

}  // namespace cluster_limit
