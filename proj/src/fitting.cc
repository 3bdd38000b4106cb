#include "pdcal/fitting.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "pdcal/error.h"

namespace pdcal {

double PolynomialFit::operator()(double x) const {
    const double u = (x - shift) / scale;
    double acc = 0.0;
    for (auto it = local.rbegin(); it != local.rend(); ++it) {
        acc = acc * u + *it;
    }
    return acc;
}

double PolynomialFit::vertex() const {
    if (local.size() < 3 || local[2] == 0.0) {
        throw Error(ErrorKind::Analysis, "vertex requires a non-degenerate quadratic fit");
    }
    return shift - scale * local[1] / (2.0 * local[2]);
}

PolynomialFit fit_polynomial(std::span<const double> x, std::span<const double> y, int degree) {
    const auto n = static_cast<Eigen::Index>(x.size());
    if (x.size() != y.size() || n < degree + 1) {
        throw Error(ErrorKind::Analysis, "not enough points for the polynomial fit");
    }
    double shift = 0.0;
    double scale = 0.0;
    for (double v : x) {
        shift += v;
    }
    shift /= static_cast<double>(n);
    for (double v : x) {
        scale = std::max(scale, std::abs(v - shift));
    }
    if (scale == 0.0) {
        scale = 1.0;
    }

    Eigen::MatrixXd design(n, degree + 1);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; i++) {
        const double u = (x[i] - shift) / scale;
        double power = 1.0;
        for (int k = 0; k <= degree; k++) {
            design(i, k) = power;
            power *= u;
        }
        rhs(i) = y[i];
    }
    const Eigen::VectorXd local = design.colPivHouseholderQr().solve(rhs);

    // Expand p(u) with u = (x − shift)/scale back into powers of x.
    std::vector<double> coeffs(degree + 1, 0.0);
    for (int k = 0; k <= degree; k++) {
        // (x − shift)^k = Σ_j C(k,j) x^j (−shift)^{k−j}
        double c = 1.0;
        for (int j = 0; j <= k; j++) {
            if (j > 0) {
                c = c * (k - j + 1) / j;
            }
            coeffs[j] += local(k) / std::pow(scale, k) * c * std::pow(-shift, k - j);
        }
    }

    PolynomialFit fit;
    fit.coefficients = std::move(coeffs);
    fit.local.assign(local.data(), local.data() + local.size());
    fit.shift = shift;
    fit.scale = scale;
    const double mean = rhs.mean();
    double total = 0.0;
    const Eigen::VectorXd residual = rhs - design * local;
    fit.residual_sum_squares = residual.squaredNorm();
    for (Eigen::Index i = 0; i < n; i++) {
        total += (rhs(i) - mean) * (rhs(i) - mean);
    }
    fit.r_squared = total > 0.0 ? 1.0 - fit.residual_sum_squares / total : 1.0;
    return fit;
}

}  // namespace pdcal
