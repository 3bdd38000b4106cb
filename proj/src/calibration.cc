#include "pdcal/calibration.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "pdcal/error.h"
#include "pdcal/fitting.h"
#include "pdcal/parallel.h"
#include "pdcal/rng.h"

namespace pdcal {

namespace {

constexpr int kMaxRecentering = 8;

struct Scan {
    LinearCalibration result;
    bool on_boundary = false;
};

void check_options(const LinearScanOptions &options) {
    if (options.grid < 3) {
        throw Error(ErrorKind::Config, "calibration grid needs at least 3 points", "calibration.grid");
    }
    if (!(options.hi > options.lo)) {
        throw Error(ErrorKind::Config, "calibration range is empty", "calibration.range");
    }
    if (options.refine_half_window < 1) {
        throw Error(ErrorKind::Config, "refinement window must be at least 1", "calibration.refine_half_window");
    }
}

// Least-squares parabola over the window around `center`, recentred on the vertex.
double refine(const std::vector<double> &x, const std::vector<double> &y, int center, int half) {
    const int n = static_cast<int>(x.size());
    double vertex = x[center];
    for (int iter = 0; iter < kMaxRecentering; iter++) {
        const int lo = std::max(0, center - half);
        const int hi = std::min(n - 1, center + half);
        const std::span<const double> xs(x.data() + lo, hi - lo + 1);
        const std::span<const double> ys(y.data() + lo, hi - lo + 1);
        const PolynomialFit fit = fit_polynomial(xs, ys, 2);
        if (!(fit.local[2] < 0.0)) {
            return vertex;
        }
        vertex = std::clamp(fit.vertex(), x[lo], x[hi]);
        const double spacing = x[1] - x[0];
        const int next = std::clamp(static_cast<int>(std::lround((vertex - x[0]) / spacing)), 0, n - 1);
        if (next == center || half == 1) {
            break;
        }
        center = next;
    }
    return vertex;
}

Scan scan_and_refine(const ScalarObjective &objective, const LinearScanOptions &options) {
    check_options(options);
    Scan scan;
    LinearCalibration &r = scan.result;
    const int n = options.grid;
    r.grid.resize(n);
    for (int i = 0; i < n; i++) {
        r.grid[i] = options.lo + (options.hi - options.lo) * i / (n - 1);
    }
    r.values.assign(n, 0.0);
    parallel_for(n, options.threads, [&](std::size_t i) { r.values[i] = objective(r.grid[i]); });
    r.evaluations = n;

    const double top = *std::max_element(r.values.begin(), r.values.end());
    int best = -1;
    int ties = 0;
    for (int i = 0; i < n; i++) {
        if (r.values[i] == top) {
            ties++;
            if (best < 0 || std::abs(r.grid[i]) < std::abs(r.grid[best])) {
                best = i;
            }
        }
    }
    r.tie = ties > 1;
    r.best_observed = top;
    r.optimum = r.grid[best];
    if (best == 0 || best == n - 1) {
        scan.on_boundary = true;
        return scan;
    }
    if (!r.tie) {
        r.optimum = refine(r.grid, r.values, best, options.refine_half_window);
    }
    return scan;
}

std::uint64_t key_of(const std::vector<double> &coefficients) {
    std::uint64_t key = 0x5ca1ab1eULL;
    for (double c : coefficients) {
        key = mix64(key ^ std::bit_cast<std::uint64_t>(c));
    }
    return key;
}

}  // namespace

LinearCalibration calibrate_linear(const ScalarObjective &objective, const LinearScanOptions &options) {
    Scan scan = scan_and_refine(objective, options);
    if (scan.on_boundary) {
        throw Error(ErrorKind::Bracket, "survival maximum lies on the scan boundary", "calibration.range");
    }
    return std::move(scan.result);
}

ScalarObjective train_objective(const DriveChain &chain, const PulseShape &shape, int pulses,
                                const MeasurementOptions &options, double amplitude) {
    return [=](double slope) {
        return measure_train(chain.with_compensation_slope(slope), shape, pulses, amplitude, options,
                             std::bit_cast<std::uint64_t>(slope));
    };
}

VectorObjective polynomial_objective(const DriveChain &chain, const std::vector<PulseShape> &shapes, int pulses,
                                     const MeasurementOptions &options) {
    if (shapes.empty()) {
        throw Error(ErrorKind::Config, "polynomial objective needs at least one pulse", "calibration.pulses");
    }
    return [=](const std::vector<double> &coefficients) {
        std::vector<double> terms(coefficients.size() + 1, 0.0);
        std::copy(coefficients.begin(), coefficients.end(), terms.begin() + 1);
        DriveChain compensated = chain;
        compensated.compensation = PhasePolynomial(terms);
        const std::uint64_t key = key_of(coefficients);
        double sum = 0.0;
        for (std::size_t k = 0; k < shapes.size(); k++) {
            sum += measure_train(compensated, shapes[k], pulses, shapes[k].amplitude, options, mix64(key + k));
        }
        return sum / static_cast<double>(shapes.size());
    };
}

namespace {

// Line search along the displacement of the last sweep. Correlated coefficients make
// plain coordinate ascent zig-zag along the ridge; this step follows the ridge instead.
// Returns false when the budget cannot cover the search.
bool pattern_move(const VectorObjective &objective, const std::vector<LinearScanOptions> &scans,
                  const std::vector<double> &before, int budget, PolynomialCalibration &out) {
    const std::size_t n = out.coefficients.size();
    std::vector<double> direction(n);
    double reach = INFINITY;
    for (std::size_t k = 0; k < n; k++) {
        direction[k] = out.coefficients[k] - before[k];
        if (direction[k] != 0.0) {
            reach = std::min(reach, (scans[k].hi - scans[k].lo) / std::abs(direction[k]));
        }
    }
    if (!std::isfinite(reach)) {
        return true;
    }
    LinearScanOptions line = scans[0];
    line.lo = -reach;
    line.hi = reach;
    line.refine_half_window = 1;
    line.grid |= 1;  // odd, so t = 0 is a grid point
    if (out.evaluations + line.grid + 1 > budget) {
        return false;
    }
    const std::vector<double> origin = out.coefficients;
    auto point = [&](double t) {
        std::vector<double> c = origin;
        for (std::size_t k = 0; k < n; k++) {
            c[k] = std::clamp(origin[k] + t * direction[k], scans[k].lo, scans[k].hi);
        }
        return c;
    };
    const Scan scan = scan_and_refine([&](double t) { return objective(point(t)); }, line);
    out.evaluations += scan.result.evaluations;
    const double t = scan.result.optimum;
    const double moved = objective(point(t));
    out.evaluations++;
    const double current = scan.result.values[line.grid / 2];
    if (moved > current) {
        out.coefficients = point(t);
    }
    return true;
}

}  // namespace

PolynomialCalibration calibrate_polynomial(const VectorObjective &objective, const PolynomialOptions &options) {
    if (options.orders < 1 || options.orders > 3) {
        throw Error(ErrorKind::Config, "compensation orders must be 1, 2 or 3", "calibration.orders");
    }
    std::vector<LinearScanOptions> scans = options.scans;
    scans.resize(options.orders, scans.empty() ? LinearScanOptions{} : scans.back());
    int per_sweep_min = scans[0].grid;
    for (const auto &s : scans) {
        per_sweep_min = std::min(per_sweep_min, s.grid);
    }
    if (options.budget < per_sweep_min) {
        throw Error(ErrorKind::Config, "evaluation budget is smaller than one grid scan", "calibration.budget");
    }

    PolynomialCalibration out;
    out.coefficients.assign(options.orders, 0.0);
    while (true) {
        const std::vector<double> before = out.coefficients;
        double largest_update = 0.0;
        bool budget_exhausted = false;
        for (int k = 0; k < options.orders; k++) {
            if (out.evaluations + scans[k].grid > options.budget) {
                budget_exhausted = true;
                break;
            }
            std::vector<double> trial = out.coefficients;
            const ScalarObjective coordinate = [&, k, trial](double x) {
                std::vector<double> c = trial;
                c[k] = x;
                return objective(c);
            };
            const Scan scan = scan_and_refine(coordinate, scans[k]);
            out.evaluations += scan.result.evaluations;
            out.hit_boundary = out.hit_boundary || scan.on_boundary;
            largest_update = std::max(largest_update, std::abs(scan.result.optimum - out.coefficients[k]));
            out.coefficients[k] = scan.result.optimum;
        }
        if (!budget_exhausted && options.orders > 1 && largest_update >= options.tolerance) {
            budget_exhausted = !pattern_move(objective, scans, before, options.budget, out);
        }
        if (budget_exhausted) {
            break;
        }
        out.sweeps++;
        if (largest_update < options.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.achieved = objective(out.coefficients);
    out.evaluations++;
    return out;
}

SlopeInference infer_slope_from_contrast(double survival, int pulses, double ay) {
    if (!(survival >= 0.0 && survival <= 1.0)) {
        throw Error(ErrorKind::Domain, "survival must lie in [0, 1]");
    }
    if (pulses < 1 || ay == 0.0) {
        throw Error(ErrorKind::Domain, "inversion needs N >= 1 and a nonzero A_y");
    }
    const double angle = std::acos(std::clamp(2.0 * survival - 1.0, -1.0, 1.0));
    SlopeInference out;
    out.magnitude = angle / (pulses * std::abs(ay));
    out.lobe_ambiguous = angle >= kLobeEdgeFraction * kPi;
    return out;
}

}  // namespace pdcal
