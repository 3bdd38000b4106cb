#include "pdcal/fitting.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pdcal/error.h"

using namespace pdcal;

TEST(FitPolynomial, ExactQuadratic) {
    std::vector<double> x, y;
    for (int k = 0; k < 9; k++) {
        x.push_back(-0.02 + 0.005 * k);
        y.push_back(0.9 - 3.0 * (x.back() - 0.0013) * (x.back() - 0.0013));
    }
    const PolynomialFit f = fit_polynomial(x, y, 2);
    EXPECT_NEAR(f.vertex(), 0.0013, 1e-13);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(f(0.0013), 0.9, 1e-13);
    ASSERT_EQ(f.coefficients.size(), 3u);
    EXPECT_NEAR(f.coefficients[2], -3.0, 1e-9);
}

TEST(FitPolynomial, LinearRegressionMatchesClosedForm) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0.0, 0.1);
    std::vector<double> x, y;
    for (int k = 0; k < 50; k++) {
        x.push_back(k * 0.3);
        y.push_back(1.5 - 0.7 * x.back() + noise(rng));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < 50; k++) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double slope = (50 * sxy - sx * sy) / (50 * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / 50;
    const PolynomialFit f = fit_polynomial(x, y, 1);
    EXPECT_NEAR(f.coefficients[1], slope, 1e-12);
    EXPECT_NEAR(f.coefficients[0], intercept, 1e-12);
    EXPECT_GT(f.r_squared, 0.9);
    EXPECT_LT(f.r_squared, 1.0);
}

TEST(FitPolynomial, WellConditionedFarFromOrigin) {
    std::vector<double> x, y;
    for (int k = 0; k < 7; k++) {
        x.push_back(1e6 + k * 1e-3);
        y.push_back(2.0 - (x.back() - (1e6 + 2.5e-3)) * (x.back() - (1e6 + 2.5e-3)));
    }
    EXPECT_NEAR(fit_polynomial(x, y, 2).vertex(), 1e6 + 2.5e-3, 1e-8);
}

TEST(FitPolynomial, TooFewPoints) {
    const std::vector<double> x{0.0, 1.0}, y{1.0, 2.0};
    EXPECT_THROW(fit_polynomial(x, y, 2), Error);
}
