#pragma once

#include <functional>
#include <vector>

namespace cluster_limit::quadrature {

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b] to an
/// absolute tolerance. Optional breakpoints split the initial range so the
/// refinement never has to discover kinks (piecewise-linear integrands).
/// Throws std::runtime_error with diagnostics when the error estimate cannot
/// be brought under tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 const std::vector<double>& breakpoints = {});

}  // namespace cluster_limit::quadrature
