#pragma once

#include <span>
#include <vector>

namespace pdcal {

struct PolynomialFit {
    std::vector<double> coefficients;  // c₀ + c₁x + …
    // Same polynomial in u = (x − shift)/scale, kept for well-conditioned evaluation.
    std::vector<double> local;
    double shift = 0.0;
    double scale = 1.0;
    double r_squared = 0.0;
    double residual_sum_squares = 0.0;

    double operator()(double x) const;
    /// Stationary point of a quadratic fit.
    double vertex() const;
};

/// Ordinary least squares via column-pivoted QR on a centred abscissa.
PolynomialFit fit_polynomial(std::span<const double> x, std::span<const double> y, int degree);

}  // namespace pdcal
