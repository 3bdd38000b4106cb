#pragma once

#include <functional>
#include <vector>

#include "pdcal/analytic.h"
#include "pdcal/experiments.h"

namespace pdcal {

/// Observed P₀ as a function of one compensation coefficient.
using ScalarObjective = std::function<double(double)>;
/// Observed P₀ as a function of compensation coefficients [φc′, φc″, φc‴] (first `orders` used).
using VectorObjective = std::function<double(const std::vector<double> &)>;

/// Default compensation scan: ±2π·5×10⁻³ over 41 points.
constexpr double kDefaultScanHalfRange = kTwoPi * 5e-3;
constexpr int kDefaultScanPoints = 41;

struct LinearScanOptions {
    double lo = -kDefaultScanHalfRange;
    double hi = kDefaultScanHalfRange;
    int grid = kDefaultScanPoints;
    /// Half-width (in grid points) of the least-squares parabola around the maximum.
    /// 1: the parabola through the top three points. Wider windows average shot noise.
    int refine_half_window = 1;
    unsigned threads = 1;
};

struct LinearCalibration {
    double optimum = 0.0;
    double best_observed = 0.0;  // max over the grid
    std::vector<double> grid;
    std::vector<double> values;
    bool tie = false;  // several grid points shared the maximum
    int evaluations = 0;
};

/// Coarse scan then parabolic refinement. Throws ErrorKind::Bracket when the maximum
/// sits on the scan boundary.
LinearCalibration calibrate_linear(const ScalarObjective &objective, const LinearScanOptions &options = {});

/// φc′ ↦ observed P₀ of an N-pulse train at amplitude A (default 1). Shot-noise
/// streams are keyed by the bit pattern of φc′, so evaluation order is irrelevant.
ScalarObjective train_objective(const DriveChain &chain, const PulseShape &shape, int pulses,
                                const MeasurementOptions &options, double amplitude = 1.0);

/// Coefficients ↦ mean observed P₀ over a set of 2π-pulse trains; compensation
/// coefficient k sets the a^{k+1} term of the compensation polynomial.
VectorObjective polynomial_objective(const DriveChain &chain, const std::vector<PulseShape> &shapes, int pulses,
                                     const MeasurementOptions &options);

struct PolynomialOptions {
    int orders = 1;
    /// Per-coordinate scan range; defaults to the linear range for every order.
    std::vector<LinearScanOptions> scans;
    double tolerance = kTwoPi * 1e-6;
    int budget = 5000;  // objective evaluations
};

struct PolynomialCalibration {
    std::vector<double> coefficients;
    double achieved = 0.0;
    bool converged = false;
    bool hit_boundary = false;
    int evaluations = 0;
    int sweeps = 0;
};

/// Cyclic coordinate ascent, each coordinate solved with calibrate_linear. Stops when
/// every update in a sweep is below tolerance, or returns best-so-far when the budget
/// runs out (converged = false).
PolynomialCalibration calibrate_polynomial(const VectorObjective &objective, const PolynomialOptions &options);

/// Inferred rotations N|φ′A_y| beyond this fraction of π are flagged as lobe-ambiguous.
constexpr double kLobeEdgeFraction = 0.9;

struct SlopeInference {
    double magnitude = 0.0;
    /// Survival at the lobe edge: branches N|φ′A_y| = π ± δ are indistinguishable.
    bool lobe_ambiguous = false;
};

/// |φ′| = arccos(2P₀ − 1)/(N·|A_y|), assuming the first lobe.
SlopeInference infer_slope_from_contrast(double survival, int pulses, double ay);

}  // namespace pdcal
