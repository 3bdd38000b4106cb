#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace pdcal {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Converts a value reported in turns (fractions of 2π) to radians.
constexpr double turns(double x) { return kTwoPi * x; }

enum class RampFamily { SinSquared };

/// Amplitude envelope a(t): sin² ramp of length `ramp` up to `amplitude`, a plateau,
/// and the mirrored ramp down. `amplitude` is the scale A, normalized so that A = 1
/// drives a 2π rotation when the Rabi rate is rabi_normalization(shape).
struct PulseShape {
    double duration = 1.2e-6;
    double ramp = 200e-9;
    double amplitude = 1.0;
    RampFamily family = RampFamily::SinSquared;

    /// Builds and validates (throws ErrorKind::Config, key "PulseShape.*").
    static PulseShape make(double duration, double ramp, double amplitude);

    PulseShape with_amplitude(double a) const;
    double plateau_length() const { return duration - 2.0 * ramp; }
};

void validate(const PulseShape &shape);

/// a(t) for t in [0, T]; throws ErrorKind::Domain outside.
double envelope_at(const PulseShape &shape, double t);

/// ∫₀ᵗ a(τ) dτ in closed form.
double envelope_integral(const PulseShape &shape, double t);

/// Ω = 2π / (T − t_ramp), making ∫₀ᵀ Ω a(t) dt = 2πA.
double rabi_normalization(const PulseShape &shape);

/// Dense polynomial c₀ + c₁x + c₂x² + …
class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coefficients);

    double operator()(double x) const;
    double derivative(double x) const;
    double coefficient(std::size_t order) const;
    void set_coefficient(std::size_t order, double value);
    const std::vector<double> &coefficients() const { return coefficients_; }
    std::size_t size() const { return coefficients_.size(); }

    friend Polynomial operator+(const Polynomial &a, const Polynomial &b);
    friend bool operator==(const Polynomial &a, const Polynomial &b) = default;

  private:
    std::vector<double> coefficients_;
};

/// Carrier phase as a function of field amplitude, [φ₀, φ′, φ″, …] in radians.
struct PhasePolynomial {
    Polynomial terms;

    PhasePolynomial() = default;
    explicit PhasePolynomial(std::vector<double> coefficients) : terms(std::move(coefficients)) {}
    static PhasePolynomial linear(double slope, double offset = 0.0) { return PhasePolynomial({offset, slope}); }

    double operator()(double a) const { return terms(a); }
    double slope() const { return terms.coefficient(1); }
    friend bool operator==(const PhasePolynomial &, const PhasePolynomial &) = default;
};

/// Programmed-to-field amplitude map g; identity by default.
struct AmplitudeMap {
    Polynomial terms{{0.0, 1.0}};

    double operator()(double a) const { return terms(a); }
    /// Smallest a ≥ 0 with g(a) = field, by bracketed Newton iteration.
    double inverse(double field, double a_max = 4.0) const;
    bool is_identity() const;
    friend bool operator==(const AmplitudeMap &, const AmplitudeMap &) = default;
};

/// The drive chain: native distortion, programmed compensation, amplitude
/// nonlinearity and the Rabi rate per unit field amplitude.
struct DriveChain {
    PhasePolynomial native;
    PhasePolynomial compensation;
    AmplitudeMap nonlinearity;
    double rabi_rate = kTwoPi / 1.0e-6;

    /// Chain with no distortion whose Rabi rate normalizes `shape`.
    static DriveChain ideal(const PulseShape &shape);
    /// Chain with a linear native slope φ_n′ and no compensation.
    static DriveChain with_native_slope(const PulseShape &shape, double slope);

    DriveChain with_compensation_slope(double slope) const;
    double effective_slope() const { return native.slope() + compensation.slope(); }
    double field_amplitude(double programmed) const { return nonlinearity(programmed); }
};

/// Checks g(0) = 0, g monotone on [0, a_max], Ω > 0 (ErrorKind::Config).
void validate(const DriveChain &chain, double a_max = 1.5);

/// φ_n(a) + φ_c(a); `a` is the field amplitude.
double phase_at(const DriveChain &chain, double a);

struct NoiseModel {
    double t2 = std::numeric_limits<double>::infinity();
    double spam = 0.0;

    bool dephasing() const { return t2 < std::numeric_limits<double>::infinity(); }
};

void validate(const NoiseModel &noise);

/// Observed survival: e/2 + (1 − e)·P_ideal.
double apply_spam(const NoiseModel &noise, double ideal);

struct PulseTrain {
    PulseShape pulse;
    int count = 1;
    double gap = 0.0;
    std::vector<double> frame_phases;

    static PulseTrain uniform(const PulseShape &pulse, int count, double gap = 0.0);
};

void validate(const PulseTrain &train);

}  // namespace pdcal
