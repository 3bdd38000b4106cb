#pragma once

#include "pdcal/core_model.h"
#include "pdcal/propagator.h"

namespace pdcal {

/// Rotation generated by one ramp: r_x = ∫Ω_x dt, r_y = ∫Ω_y dt.
struct RampRotation {
    double rx = 0.0;
    double ry = 0.0;
};

/// Integrals over the up-ramp with the phase referenced to the plateau, φ(a(t)) − φ(A).
RampRotation ramp_rotation_integrals(const DriveChain &chain, const PulseShape &shape);

struct RotationAngles {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// First-order Tait-Bryan angles of the ramp unitary, U ≃ X(αx)·Y(αy)·Z(αz).
RotationAngles tait_bryan_ramp_angles(const RampRotation &r);

/// exp(−i·x·σx/2)·exp(−i·y·σy/2)·exp(−i·z·σz/2).
Su2Matrix compose_xyz(const RotationAngles &angles);

struct EulerDecomposition {
    RotationAngles angles;
    /// |y| = π/2: z is pinned to 0 and only x + z is determined.
    bool gimbal_degenerate = false;
};

/// Exact decomposition U ≅ X(x)·Y(y)·Z(z) modulo global phase, y ∈ [−π/2, π/2].
EulerDecomposition zyx_euler_decompose(const Su2Matrix &u);

/// First-order theory of an N-pulse train around the A = 1 (2π) pulse.
struct PerturbativeCoefficients {
    PulseShape shape;  // amplitude 1: the a_2π profile
    double rabi_rate = 0.0;
    double epsilon = 0.0;
    double ax = kTwoPi;
    double ay = 0.0;
    int pulses = 1;

    /// θ(t) = Ω ∫₀ᵗ a_2π(τ) dτ.
    double theta(double t) const;
    PerturbativeCoefficients with(double epsilon, int pulses) const;
};

/// A_x and A_y by adaptive quadrature. The sine-weighted companion integral must
/// vanish by symmetry; otherwise throws ErrorKind::Symmetry.
PerturbativeCoefficients perturbative_coefficients(const PulseShape &shape, double epsilon = 0.0, int pulses = 1);

/// ½(1 + cos(N·√((εA_x)² + (φ′A_y)²))).
double perturbative_survival(const PerturbativeCoefficients &coeffs, double phase_slope);

/// exp(−i(εA_x σx + φ′A_y σy)/2): the first-order single-pulse unitary in exponential form.
Su2Matrix perturbative_pulse_unitary(const PerturbativeCoefficients &coeffs, double phase_slope);

/// U₀(0,T) + U₁(0,T) = −I + i(εA_x σx + φ′A_y σy)/2.
Su2Matrix first_order_unitary(const PerturbativeCoefficients &coeffs, double phase_slope);

struct SensitivityExpansion {
    double quadratic = 1.0;  // at ε = 0
    double quartic = 1.0;    // at ε = 1/N
};

SensitivityExpansion sensitivity_expansions(const PerturbativeCoefficients &coeffs, double phase_slope);

struct DecoherenceEstimate {
    double survival = 1.0;
    double phase_deficit = 0.0;
    double dephasing_deficit = 0.0;
    /// φ′ / (T/T₂); the technique needs φ′ ≫ T/T₂.
    double sensitivity_ratio = 0.0;
    bool sensitivity_satisfied = false;
    /// N·T ≪ T₂, taken as N·T ≤ 0.1·T₂.
    bool coherent_regime = false;
};

/// Ratio φ′/(T/T₂) above which "φ′ ≫ T/T₂" is reported as satisfied.
constexpr double kSensitivityMargin = 100.0;

DecoherenceEstimate decoherence_survival(const PerturbativeCoefficients &coeffs, double phase_slope,
                                         double duration, double t2);

}  // namespace pdcal
