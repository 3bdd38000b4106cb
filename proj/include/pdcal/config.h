#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdcal/benchmarking.h"
#include "pdcal/calibration.h"
#include "pdcal/core_model.h"
#include "pdcal/experiments.h"

namespace pdcal {

/// A scan axis: either explicit values or `count` evenly spaced points on [start, stop].
struct Grid {
    std::vector<double> explicit_values;
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
    bool is_range = false;

    static Grid range(double start, double stop, int count);
    static Grid list(std::vector<double> values);
    std::vector<double> values() const;
};

struct CalibrationSettings {
    LinearScanOptions scan;
    double amplitude = 1.0;
    int orders = 1;
    int budget = 5000;
    /// Per-order ranges for polynomial calibration; empty means `scan` for every order.
    std::vector<LinearScanOptions> ranges;
    /// Extra 2π trains (duration, amplitude) averaged into the polynomial objective.
    std::vector<PulseShape> trains;
};

struct SandwichSettings {
    int blocks = 80;
    ProbePulse pi{1.2e-6, 200e-9, 0.5};
    ProbePulse half{1.2e-6, 200e-9, 0.25};
};

struct RbSettings {
    std::vector<int> lengths = geometric_lengths(1 << 20);
    int randomizations = 20;
    DecompositionStrategy strategy = DecompositionStrategy::PiAndPiHalf;
    double depolarizing = 0.0;
    std::optional<double> fixed_offset;
    int bootstrap = 0;
};

struct ExperimentSettings {
    int pulses = 200;
    Grid amplitudes = Grid::range(0.0, 1.2, 2401);
    Grid phi_c_prime = Grid::range(-kDefaultScanHalfRange, kDefaultScanHalfRange, kDefaultScanPoints);
    int shots = 0;
    std::uint64_t seed = 1;
    double step = kDefaultStep;
    unsigned threads = 1;
    bool quantize = false;
    CalibrationSettings calibration;
    SandwichSettings sandwich;
    RbSettings rb;
};

/// Fully resolved run configuration; every quantity in SI units and radians.
struct RunConfig {
    PulseShape pulse;
    DriveChain chain;
    NoiseModel noise;
    ExperimentSettings experiment;

    MeasurementOptions measurement() const;
    RbConfig rb() const;
};

struct ConfigIssue {
    std::string key;
    std::string message;
};

/// Every schema and invariant violation in `document`, without running anything.
std::vector<ConfigIssue> validate_config(const nlohmann::json &document);

/// Parses and validates; throws ErrorKind::Config naming the first offending key.
RunConfig parse_config(const nlohmann::json &document);
RunConfig load_config_file(const std::string &path);

/// Canonical form: defaults filled, angles in radians, T₂ = ∞ as null.
/// parse_config(to_json(c)) reproduces c exactly.
nlohmann::json to_json(const RunConfig &config);

}  // namespace pdcal
