#pragma once

#include <functional>
#include <span>

namespace pdcal {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

/// Adaptive Simpson with Richardson correction; `abs_tol` is split across panels.
QuadratureResult adaptive_simpson(const std::function<double(double)> &f, double a, double b,
                                  double abs_tol = 1e-10, int max_depth = 48);

/// Integrates over [a, b] split at `breakpoints` (sorted, inside (a, b)), so that
/// kinks of piecewise integrands sit on panel edges.
QuadratureResult adaptive_simpson_piecewise(const std::function<double(double)> &f, double a, double b,
                                            std::span<const double> breakpoints, double abs_tol = 1e-10);

}  // namespace pdcal
