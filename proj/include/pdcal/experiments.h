#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdcal/core_model.h"
#include "pdcal/propagator.h"

namespace pdcal {

/// How a scan point is "measured": noise, optional projection noise, AWG quantization.
struct MeasurementOptions {
    NoiseModel noise;
    int shots = 0;  // 0: exact expectation values
    std::uint64_t seed = 1;
    bool quantize_amplitude = false;
    double step = kDefaultStep;
    unsigned threads = 1;
};

/// Programmed amplitudes are quantized to 15 bits of full scale when enabled.
constexpr int kAwgBits = 15;
double quantize_amplitude(double a);

struct ScanAxis {
    std::string name;
    std::string unit;
    std::vector<double> values;
};

struct ScanProvenance {
    DriveChain chain;
    PulseShape shape;
    int pulses = 1;
    NoiseModel noise;
    int shots = 0;
    std::uint64_t seed = 1;
    double step = kDefaultStep;
};

/// Survival over a rectangular grid, row-major (last axis fastest).
struct ScanResult {
    std::vector<ScanAxis> axes;
    std::vector<double> survival;
    ScanProvenance provenance;

    double at(std::size_t i, std::size_t j = 0) const;
};

/// Observed P₀ of an N-pulse train at programmed amplitude A. `point_index` keys the
/// shot-noise stream so any point can be recomputed in isolation.
double measure_train(const DriveChain &chain, const PulseShape &shape, int pulses, double amplitude,
                     const MeasurementOptions &options, std::uint64_t point_index);

/// Binomial estimate of `probability` from `shots` draws on the stream `key`.
double sample_shots(double probability, int shots, std::uint64_t key);

ScanResult rabi_amplitude_scan(const DriveChain &chain, const PulseShape &shape, const std::vector<double> &amplitudes,
                               const MeasurementOptions &options = {});

ScanResult train_amplitude_scan(const DriveChain &chain, const PulseShape &shape, int pulses,
                                const std::vector<double> &amplitudes, const MeasurementOptions &options = {});

/// 2-D scan over (A, φc′). φc′ replaces the linear compensation coefficient.
ScanResult compensation_map(const DriveChain &chain, const PulseShape &shape, int pulses,
                            const std::vector<double> &amplitudes, const std::vector<double> &compensation_slopes,
                            const MeasurementOptions &options = {});

/// One pulse of the π/2–π–π/2 probe, before amplitude trimming.
struct ProbePulse {
    double duration = 1.2e-6;
    double ramp = 200e-9;
    double amplitude = 0.5;
};

struct SandwichResult {
    double phase_difference = 0.0;  // inferred Δφ between π and π/2 pulses
    double inferred_slope = 0.0;    // linear-chain slope that reproduces the observations
    double survival = 1.0;          // P₀ after M blocks
    double reference_survival = 1.0;  // P₀ with the sign-resolving frame offset on the π pulses
    double pi_amplitude = 0.0;      // trimmed programmed amplitudes
    double half_amplitude = 0.0;
    double pi_field = 0.0;          // plateau field amplitudes g(a)
    double half_field = 0.0;
    double block_fidelity = 1.0;    // |tr(U_block^M)|/2 against the identity
    int blocks = 0;
};

/// Relative amplitude change allowed when trimming probe pulses to exact area.
constexpr double kProbeTrimTolerance = 0.05;

/// Programmed amplitude giving field area `area` for `pulse` (Ω ∫ g(a·s(t)) dt).
double trim_amplitude(const DriveChain &chain, const ProbePulse &pulse, double area);

/// M blocks of π/2 – π – π/2 pulses about x. The phase difference is inferred by
/// fitting the slope of a linear phase model to the observed survival at zero and at a
/// known π-pulse frame offset (the offset resolves the sign).
SandwichResult sandwich_phase_probe(const DriveChain &chain, const ProbePulse &pi_pulse, const ProbePulse &half_pulse,
                                    int blocks, const MeasurementOptions &options = {});

struct PeriodAnalysis {
    std::vector<double> revivals;   // interpolated revival amplitudes
    std::vector<double> spacings;   // successive differences
    std::vector<double> midpoints;  // (A_n + A_{n+1}) / 2
    double mean_spacing = 0.0;
    double max_relative_deviation = 0.0;  // max |spacing/mean − 1|
    bool constant = false;
    /// g(a) ≈ b₁a + b₂a², from b₁ + b₂(A_n + A_{n+1}) = 1/(N·ΔA).
    double linear_coefficient = 1.0;
    double quadratic_coefficient = 0.0;
};

constexpr double kPeriodConstancyTolerance = 1e-3;

/// Revival spacing of a train scan; needs at least 10 oscillations.
PeriodAnalysis oscillation_period_analysis(const ScanResult &scan);

}  // namespace pdcal
