#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pdcal/core_model.h"
#include "pdcal/propagator.h"

namespace pdcal {

enum class DecompositionStrategy { PiAndPiHalf, PiHalfOnly, DoubleDurationPi };

/// Parses "PiAndPiHalf" | "PiHalfOnly" | "DoubleDurationPi" (ErrorKind::Config otherwise).
DecompositionStrategy parse_strategy(std::string_view name);
std::string_view to_string(DecompositionStrategy strategy);

constexpr int kCliffordCount = 24;

/// One step of a compiled gate: either a virtual z-rotation (frame update) or a
/// physical pulse of the given area about the equatorial axis at `phase`.
struct GateOp {
    bool virtual_z = false;
    double angle = 0.0;  // z angle, or pulse area
    double phase = 0.0;  // logical axis azimuth of a pulse

    static GateOp z(double angle) { return {true, angle, 0.0}; }
    static GateOp pulse(double area, double phase) { return {false, area, phase}; }
};

/// Ideal composition of ops in time order (later ops act on the left).
Su2Matrix compose_ops(const std::vector<GateOp> &ops);
int physical_pulse_count(const std::vector<GateOp> &ops);

struct CliffordElement {
    int index = 0;
    Su2Matrix unitary;
    std::array<std::vector<GateOp>, 3> decompositions;  // by strategy
};

/// The single-qubit Clifford group modulo global phase. Element 0 is the identity.
class CliffordGroup {
  public:
    CliffordGroup();

    const std::vector<CliffordElement> &elements() const { return elements_; }
    const CliffordElement &operator[](int i) const { return elements_.at(i); }
    std::size_t size() const { return elements_.size(); }

    /// Index of a·b (a applied after b).
    int multiply(int a, int b) const { return product_[a][b]; }
    int inverse(int a) const { return inverse_[a]; }
    /// Index of the element equal to u modulo global phase; −1 when u is not Clifford.
    int find(const Su2Matrix &u, double tolerance = 1e-9) const;

  private:
    std::vector<CliffordElement> elements_;
    std::array<std::array<int, kCliffordCount>, kCliffordCount> product_{};
    std::array<int, kCliffordCount> inverse_{};
};

/// Shared table, built once.
const CliffordGroup &clifford_table();

const std::vector<GateOp> &decompose_clifford(int index, DecompositionStrategy strategy);

/// Mean physical pulses per Clifford over the group.
double mean_pulse_count(DecompositionStrategy strategy);

/// A physical pulse ready for propagation.
struct PhysicalPulse {
    double area = 0.0;   // nominal rotation angle
    double phase = 0.0;  // physical frame phase
    double amplitude = 0.0;
    double duration = 0.0;
};

struct RbSequence {
    std::vector<int> cliffords;  // random part, in time order
    int recovery = 0;
};

/// m uniform Cliffords plus the recovery element; deterministic in `seed`.
RbSequence generate_rb_sequence(int length, std::uint64_t seed);

/// Amplitudes for π and π/2 pulses on the base shape (and the doubled π duration).
struct PulseCalibration {
    PulseShape half;     // π/2 area
    PulseShape pi;       // π area, base duration
    PulseShape long_pi;  // π area, twice the base duration
};

PulseCalibration calibrate_pulses(const DriveChain &chain, const PulseShape &base);

/// Compiles a Clifford sequence (random part then recovery) through virtual-z frame tracking.
std::vector<PhysicalPulse> compile_sequence(const RbSequence &sequence, DecompositionStrategy strategy,
                                            const PulseCalibration &pulses);

struct RbConfig {
    std::vector<int> lengths;
    int randomizations = 10;
    std::uint64_t seed = 1;
    DecompositionStrategy strategy = DecompositionStrategy::PiAndPiHalf;
    DriveChain chain;
    PulseShape pulse;  // base shape; amplitude is trimmed per pulse kind
    NoiseModel noise;
    double depolarizing = 0.0;  // artificial depolarizing strength per Clifford
    int shots = 0;
    double step = kDefaultStep;
    unsigned threads = 1;
    bool use_cache = true;  // false: propagate every pulse directly
};

/// Default geometric length ladder 1, 2, 4, … up to `longest`.
std::vector<int> geometric_lengths(int longest, double ratio = 2.0);

void validate(const RbConfig &config);

struct RbTable {
    std::vector<int> lengths;
    std::vector<std::vector<double>> survival;  // [length][randomization]
    std::vector<double> mean;
};

RbTable simulate_rb(const RbConfig &config);

/// Survival of a single compiled sequence (no shot noise, no SPAM).
double sequence_survival(const RbConfig &config, const RbSequence &sequence);

struct RbFit {
    double p = 1.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double error_per_clifford = 0.0;
    double sigma_p = 0.0;
    double sigma_amplitude = 0.0;
    double sigma_offset = 0.0;
    double sigma_error = 0.0;
    double bootstrap_sigma_error = 0.0;
    bool p_clamped = false;
    bool offset_clamped = false;
};

/// Asymptote of single-qubit RB under unital noise; SPAM maps it to itself.
constexpr double kUnitalAsymptote = 0.5;

struct RbFitOptions {
    /// Holds B at this value instead of fitting it; resolves the A·(1 − p) degeneracy
    /// when only the onset of the decay is visible.
    std::optional<double> fixed_offset;
};

/// Least squares survival = A·pᵐ + B with B ∈ [0, 1] and p ≤ 1.
RbFit fit_rb_decay(const std::vector<int> &lengths, const std::vector<double> &survival,
                   const RbFitOptions &options = {});
RbFit fit_rb_decay(const RbTable &table, const RbFitOptions &options = {});

/// Fit plus nonparametric bootstrap over randomizations for the error bar.
RbFit fit_rb_decay_bootstrap(const RbTable &table, int resamples = 200, std::uint64_t seed = 1,
                             const RbFitOptions &options = {});

struct RbScanPoint {
    double compensation_slope = 0.0;
    RbFit fit;
};

/// RB error per Clifford as a function of φc′, with common random sequences at every point.
std::vector<RbScanPoint> rb_compensation_scan(const RbConfig &config, const std::vector<double> &slopes,
                                              int bootstrap_resamples = 0, const RbFitOptions &options = {});

}  // namespace pdcal
