#include "cluster_limit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cluster_limit::quadrature {

namespace {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
constexpr double kKronrodNodes[8] = {
    0.0,
    0.2077849550078985,
    0.4058451513773972,
    0.5860872354676911,
    0.7415311855993945,
    0.8648644233597691,
    0.9491079123427585,
    0.9914553711208126,
};
constexpr double kKronrodWeights[8] = {
    0.2094821410847278,
    0.2044329400752989,
    0.1903505780647854,
    0.1690047266392679,
    0.1406532597155259,
    0.1047900103222502,
    0.06309209262997855,
    0.02293532201052922,
};
// Gauss weights aligned with the even Kronrod node indices 0,2,4,6.
constexpr double kGaussWeights[4] = {
    0.4179591836734694,
    0.3818300505051189,
    0.2797053914892767,
    0.1294849661688697,
};

struct Panel {
    double value;
    double error;
};

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    fv[7] = f(center);
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kKronrodNodes[i];
        fv[7 - i] = f(center - dx);
        fv[7 + i] = f(center + dx);
    }
    double kronrod = kKronrodWeights[0] * fv[7];
    double gauss = kGaussWeights[0] * fv[7];
    for (int i = 1; i < 8; ++i) {
        kronrod += kKronrodWeights[i] * (fv[7 - i] + fv[7 + i]);
        if (i % 2 == 0) {
            gauss += kGaussWeights[i / 2] * (fv[7 - i] + fv[7 + i]);
        }
    }
    kronrod *= half;
    gauss *= half;
    const double diff = std::abs(kronrod - gauss);
    // Standard QUADPACK-style error sharpening.
    const double err = diff == 0.0 ? 0.0 : diff * std::min(1.0, std::pow(200.0 * diff, 1.5));
    return {kronrod, std::max(err, std::abs(kronrod) * 1e-15)};
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
    const Panel whole = gauss_kronrod(f, a, b);
    if (whole.error <= tol || b - a < 1e-14 * (std::abs(a) + std::abs(b) + 1.0)) {
        if (whole.error > tol && depth <= 0) {
            throw std::runtime_error(
                "quadrature: failed to converge on [" + std::to_string(a) + "," +
                std::to_string(b) + "], error estimate " + std::to_string(whole.error));
        }
        return whole.value;
    }
    if (depth <= 0) {
        throw std::runtime_error(
            "quadrature: max recursion depth reached on [" + std::to_string(a) + "," +
            std::to_string(b) + "], error estimate " + std::to_string(whole.error));
    }
    const double mid = 0.5 * (a + b);
    return adapt(f, a, mid, 0.5 * tol, depth - 1) + adapt(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 const std::vector<double>& breakpoints) {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("integrate: tolerance must be positive");
    if (a == b) return 0.0;
    if (!(a < b)) throw std::invalid_argument("integrate: need a < b");
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("integrate: endpoints must be finite (transform first)");
    }

    std::vector<double> cuts{a, b};
    for (double c : breakpoints) {
        if (c > a && c < b) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    const double per_panel = abs_tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += adapt(f, cuts[i], cuts[i + 1], per_panel, 48);
    }
    return total;
}

}  // namespace cluster_limit::quadrature
