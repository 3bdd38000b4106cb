#include "pdcal/experiments.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "pdcal/error.h"
#include "pdcal/parallel.h"
#include "pdcal/quadrature.h"
#include "pdcal/rng.h"

namespace pdcal {

namespace {

void require_grid(const std::vector<double> &grid, const char *key) {
    if (grid.empty()) {
        throw Error(ErrorKind::Config, "scan grid is empty", key);
    }
}

ScanProvenance provenance_of(const DriveChain &chain, const PulseShape &shape, int pulses,
                             const MeasurementOptions &options) {
    ScanProvenance p;
    p.chain = chain;
    p.shape = shape;
    p.pulses = pulses;
    p.noise = options.noise;
    p.shots = options.shots;
    p.seed = options.seed;
    p.step = options.step;
    return p;
}

}  // namespace

double quantize_amplitude(double a) {
    constexpr double full_scale = (1 << kAwgBits) - 1;
    return std::round(a * full_scale) / full_scale;
}

double ScanResult::at(std::size_t i, std::size_t j) const {
    const std::size_t inner = axes.size() > 1 ? axes[1].values.size() : 1;
    return survival.at(i * inner + j);
}

double sample_shots(double probability, int shots, std::uint64_t key) {
    if (shots <= 0) {
        return probability;
    }
    CounterRng rng(key);
    std::binomial_distribution<int> draw(shots, std::clamp(probability, 0.0, 1.0));
    return static_cast<double>(draw(rng)) / shots;
}

double measure_train(const DriveChain &chain, const PulseShape &shape, int pulses, double amplitude,
                     const MeasurementOptions &options, std::uint64_t point_index) {
    const double a = options.quantize_amplitude ? quantize_amplitude(amplitude) : amplitude;
    const PulseTrain train = PulseTrain::uniform(shape.with_amplitude(a), pulses);
    double p;
    if (options.noise.dephasing()) {
        p = survival_probability(propagate_density(chain, train, options.noise, options.step), options.noise);
    } else {
        p = survival_probability(propagate_train(chain, train, options.step), options.noise);
    }
    return sample_shots(p, options.shots, derive_seed(options.seed, point_index));
}

ScanResult rabi_amplitude_scan(const DriveChain &chain, const PulseShape &shape, const std::vector<double> &amplitudes,
                               const MeasurementOptions &options) {
    return train_amplitude_scan(chain, shape, 1, amplitudes, options);
}

ScanResult train_amplitude_scan(const DriveChain &chain, const PulseShape &shape, int pulses,
                                const std::vector<double> &amplitudes, const MeasurementOptions &options) {
    require_grid(amplitudes, "experiment.amplitudes");
    if (pulses < 1) {
        throw Error(ErrorKind::Config, "pulse count must be at least 1", "experiment.pulses");
    }
    validate(shape);
    validate(options.noise);
    ScanResult result;
    result.axes.push_back({"A", "", amplitudes});
    result.survival.assign(amplitudes.size(), 0.0);
    result.provenance = provenance_of(chain, shape, pulses, options);
    parallel_for(amplitudes.size(), options.threads, [&](std::size_t i) {
        result.survival[i] = measure_train(chain, shape, pulses, amplitudes[i], options, i);
    });
    return result;
}

ScanResult compensation_map(const DriveChain &chain, const PulseShape &shape, int pulses,
                            const std::vector<double> &amplitudes, const std::vector<double> &compensation_slopes,
                            const MeasurementOptions &options) {
    require_grid(amplitudes, "experiment.amplitudes");
    require_grid(compensation_slopes, "experiment.phi_c_prime");
    validate(shape);
    validate(options.noise);
    ScanResult result;
    result.axes.push_back({"A", "", amplitudes});
    result.axes.push_back({"phi_c_prime", "rad", compensation_slopes});
    const std::size_t inner = compensation_slopes.size();
    result.survival.assign(amplitudes.size() * inner, 0.0);
    result.provenance = provenance_of(chain, shape, pulses, options);
    parallel_for(result.survival.size(), options.threads, [&](std::size_t flat) {
        const DriveChain compensated = chain.with_compensation_slope(compensation_slopes[flat % inner]);
        result.survival[flat] = measure_train(compensated, shape, pulses, amplitudes[flat / inner], options, flat);
    });
    return result;
}

double trim_amplitude(const DriveChain &chain, const ProbePulse &pulse, double area) {
    const PulseShape unit = PulseShape::make(pulse.duration, pulse.ramp, 1.0);
    auto pulse_area = [&](double a) {
        if (chain.nonlinearity.is_identity()) {
            return chain.rabi_rate * a * (unit.duration - unit.ramp);
        }
        const double breaks[] = {unit.ramp, unit.duration - unit.ramp};
        return chain.rabi_rate *
               adaptive_simpson_piecewise([&](double t) { return chain.field_amplitude(a * envelope_at(unit, t)); },
                                          0.0, unit.duration, breaks, 1e-14)
                   .value;
    };
    double lo = 0.0;
    double hi = std::max(2.0 * pulse.amplitude, 1e-3);
    while (pulse_area(hi) < area) {
        hi *= 2.0;
        if (hi > 64.0) {
            throw Error(ErrorKind::Calibration, "pulse area cannot be reached within the amplitude range");
        }
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-16 * hi; iter++) {
        const double mid = 0.5 * (lo + hi);
        (pulse_area(mid) < area ? lo : hi) = mid;
    }
    const double trimmed = 0.5 * (lo + hi);
    if (std::abs(trimmed - pulse.amplitude) > kProbeTrimTolerance * pulse.amplitude) {
        throw Error(ErrorKind::Calibration, "probe pulse area is off by more than the trim tolerance",
                    "experiment.sandwich");
    }
    return trimmed;
}

namespace {

struct ProbeSequence {
    PulseShape pi;
    PulseShape half;
    int blocks;
};

// Ideal-model survival after `blocks` π/2–π–π/2 blocks, π pulses shifted by `pi_offset`.
double probe_survival(const DriveChain &chain, const ProbeSequence &seq, double pi_offset, const NoiseModel &noise,
                      double step) {
    if (noise.dephasing()) {
        DensityMatrix state = DensityMatrix::ground();
        for (int b = 0; b < seq.blocks; b++) {
            state = propagate_density_pulse(chain, seq.half, 0.0, noise, state, step);
            state = propagate_density_pulse(chain, seq.pi, pi_offset, noise, state, step);
            state = propagate_density_pulse(chain, seq.half, 0.0, noise, state, step);
        }
        return survival_probability(state, noise);
    }
    const Su2Matrix half = propagate_pulse(chain, seq.half, 0.0, step);
    const Su2Matrix pi = propagate_pulse(chain, seq.pi, pi_offset, step);
    const Su2Matrix block = half * pi * half;
    Su2Matrix total = Su2Matrix::Identity();
    for (int b = 0; b < seq.blocks; b++) {
        total = block * total;
    }
    return survival_probability(total, noise);
}

}  // namespace

SandwichResult sandwich_phase_probe(const DriveChain &chain, const ProbePulse &pi_pulse, const ProbePulse &half_pulse,
                                    int blocks, const MeasurementOptions &options) {
    if (blocks < 1) {
        throw Error(ErrorKind::Config, "block count must be at least 1", "experiment.blocks");
    }
    validate(options.noise);
    SandwichResult out;
    out.blocks = blocks;
    out.pi_amplitude = trim_amplitude(chain, pi_pulse, kPi);
    out.half_amplitude = trim_amplitude(chain, half_pulse, 0.5 * kPi);
    out.pi_field = chain.field_amplitude(out.pi_amplitude);
    out.half_field = chain.field_amplitude(out.half_amplitude);

    const ProbeSequence seq{PulseShape::make(pi_pulse.duration, pi_pulse.ramp, out.pi_amplitude),
                            PulseShape::make(half_pulse.duration, half_pulse.ramp, out.half_amplitude), blocks};
    const double reference_offset = 0.25 / blocks;

    out.survival = sample_shots(probe_survival(chain, seq, 0.0, options.noise, options.step), options.shots,
                                derive_seed(options.seed, 0));
    out.reference_survival = sample_shots(probe_survival(chain, seq, reference_offset, options.noise, options.step),
                                          options.shots, derive_seed(options.seed, 1));
    {
        const Su2Matrix half = propagate_pulse(chain, seq.half, 0.0, options.step);
        const Su2Matrix pi = propagate_pulse(chain, seq.pi, 0.0, options.step);
        const Su2Matrix block = half * pi * half;
        Su2Matrix total = Su2Matrix::Identity();
        for (int b = 0; b < blocks; b++) {
            total = block * total;
        }
        out.block_fidelity = gate_fidelity(Su2Matrix::Identity(), total);
    }

    const double field_gap = out.pi_field - out.half_field;
    if (std::abs(field_gap) <= 1e-12 * std::max(out.pi_field, out.half_field)) {
        // Equal plateau amplitudes carry no relative phase by construction.
        return out;
    }

    // Model: the same pulses through a chain whose phase is s·g(a). Fit s.
    DriveChain model = chain;
    model.native = PhasePolynomial::linear(0.0);
    model.compensation = PhasePolynomial();
    NoiseModel model_noise = options.noise;
    auto residual = [&](double s) {
        model.native = PhasePolynomial::linear(s);
        const double r0 = probe_survival(model, seq, 0.0, model_noise, options.step) - out.survival;
        const double r1 = probe_survival(model, seq, reference_offset, model_noise, options.step) -
                          out.reference_survival;
        return r0 * r0 + r1 * r1;
    };
    // First lobe: the accumulated block rotation 2·M·Δ stays below π.
    const double s_max = 0.5 * kPi / (blocks * std::abs(field_gap));
    constexpr int kCoarse = 400;
    double best_s = 0.0;
    double best_r = residual(0.0);
    for (int k = -kCoarse; k <= kCoarse; k++) {
        const double s = s_max * k / kCoarse;
        const double r = residual(s);
        if (r < best_r) {
            best_r = r;
            best_s = s;
        }
    }
    // Golden-section refinement inside the neighbouring coarse cells.
    double lo = best_s - s_max / kCoarse;
    double hi = best_s + s_max / kCoarse;
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = residual(x1);
    double f2 = residual(x2);
    for (int iter = 0; iter < 80; iter++) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = residual(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = residual(x2);
        }
    }
    out.inferred_slope = 0.5 * (lo + hi);
    out.phase_difference = out.inferred_slope * field_gap;
    return out;
}

PeriodAnalysis oscillation_period_analysis(const ScanResult &scan) {
    if (scan.axes.size() != 1) {
        throw Error(ErrorKind::Analysis, "period analysis needs a 1-D amplitude scan");
    }
    const auto &x = scan.axes[0].values;
    const auto &p = scan.survival;
    PeriodAnalysis out;
    for (std::size_t i = 1; i + 1 < x.size(); i++) {
        if (!(p[i] >= p[i - 1] && p[i] > p[i + 1] && p[i] > 0.5)) {
            continue;
        }
        // Vertex of the parabola through the three bracketing samples.
        const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
        const double y0 = p[i - 1], y1 = p[i], y2 = p[i + 1];
        const double d0 = (y1 - y0) / (x1 - x0);
        const double d1 = (y2 - y1) / (x2 - x1);
        const double curvature = (d1 - d0) / (x2 - x0);
        double vertex = x1;
        if (curvature < 0.0) {
            vertex = 0.5 * (x0 + x1) - d0 / (2.0 * curvature);
            vertex = std::clamp(vertex, x0, x2);
        }
        out.revivals.push_back(vertex);
    }
    if (out.revivals.size() < 11) {
        throw Error(ErrorKind::Analysis, "fewer than 10 oscillations in the scan");
    }
    const double n = scan.provenance.pulses;
    std::vector<double> ys;
    for (std::size_t k = 0; k + 1 < out.revivals.size(); k++) {
        const double spacing = out.revivals[k + 1] - out.revivals[k];
        out.spacings.push_back(spacing);
        out.midpoints.push_back(0.5 * (out.revivals[k] + out.revivals[k + 1]));
        ys.push_back(1.0 / (n * spacing));
    }
    double sum = 0.0;
    for (double s : out.spacings) {
        sum += s;
    }
    out.mean_spacing = sum / out.spacings.size();
    for (double s : out.spacings) {
        out.max_relative_deviation = std::max(out.max_relative_deviation, std::abs(s / out.mean_spacing - 1.0));
    }
    out.constant = out.max_relative_deviation <= kPeriodConstancyTolerance;

    // Least squares 1/(N·ΔA) = b₁ + b₂·(A_n + A_{n+1}).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(ys.size());
    for (std::size_t k = 0; k < ys.size(); k++) {
        const double xs = 2.0 * out.midpoints[k];
        sx += xs;
        sy += ys[k];
        sxx += xs * xs;
        sxy += xs * ys[k];
    }
    const double denom = m * sxx - sx * sx;
    out.quadratic_coefficient = (m * sxy - sx * sy) / denom;
    out.linear_coefficient = (sy - out.quadratic_coefficient * sx) / m;
    return out;
}

}  // namespace pdcal
