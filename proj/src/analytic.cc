#include "pdcal/analytic.h"

#include <array>
#include <cmath>

#include "pdcal/error.h"
#include "pdcal/quadrature.h"

namespace pdcal {

namespace {

constexpr double kQuadTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-9;

// Pauli-transfer (SO(3)) image of U: R_ij = ½ tr(σ_i U σ_j U†).
Eigen::Matrix3d rotation_matrix(const Su2Matrix &u) {
    const std::array<const Eigen::Matrix2cd *, 3> sigma{&pauli_x(), &pauli_y(), &pauli_z()};
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; i++) {
        for (int j = 0; j < 3; j++) {
            r(i, j) = 0.5 * (*sigma[i] * u * *sigma[j] * u.adjoint()).trace().real();
        }
    }
    return r;
}

}  // namespace

RampRotation ramp_rotation_integrals(const DriveChain &chain, const PulseShape &shape) {
    validate(shape);
    const double omega = chain.rabi_rate;
    const double plateau_phase = phase_at(chain, chain.field_amplitude(shape.amplitude));
    auto component = [&](bool y) {
        return [&, y](double t) {
            const double field = chain.field_amplitude(envelope_at(shape, t));
            const double dphi = phase_at(chain, field) - plateau_phase;
            return omega * field * (y ? std::sin(dphi) : std::cos(dphi));
        };
    };
    RampRotation r;
    r.rx = adaptive_simpson(component(false), 0.0, shape.ramp, kQuadTolerance).value;
    r.ry = adaptive_simpson(component(true), 0.0, shape.ramp, kQuadTolerance).value;
    return r;
}

RotationAngles tait_bryan_ramp_angles(const RampRotation &r) {
    RotationAngles out;
    out.x = r.rx;
    if (std::abs(r.rx) < 1e-6) {
        // Series of sin(x)/x and (1 − cos x)/x.
        const double x = r.rx;
        out.y = r.ry * (1.0 - x * x / 6.0);
        out.z = -r.ry * (0.5 * x - x * x * x / 24.0);
    } else {
        out.y = r.ry * std::sin(r.rx) / r.rx;
        out.z = -r.ry * (1.0 - std::cos(r.rx)) / r.rx;
    }
    return out;
}

Su2Matrix compose_xyz(const RotationAngles &angles) { return rx(angles.x) * ry(angles.y) * rz(angles.z); }

EulerDecomposition zyx_euler_decompose(const Su2Matrix &u) {
    // For R = Rx(a)·Ry(b)·Rz(c): R02 = sin b, (R00, R01) = cos b·(cos c, −sin c),
    // (R12, R22) = cos b·(−sin a, cos a).
    const Eigen::Matrix3d r = rotation_matrix(u);
    EulerDecomposition out;
    const double cos_b = std::hypot(r(0, 0), r(0, 1));
    out.angles.y = std::atan2(r(0, 2), cos_b);
    if (cos_b < 1e-12) {
        out.gimbal_degenerate = true;
        out.angles.z = 0.0;
        out.angles.x = std::atan2(r(2, 1), r(1, 1));
    } else {
        out.angles.z = std::atan2(-r(0, 1), r(0, 0));
        out.angles.x = std::atan2(-r(1, 2), r(2, 2));
    }
    return out;
}

double PerturbativeCoefficients::theta(double t) const { return rabi_rate * envelope_integral(shape, t); }

PerturbativeCoefficients PerturbativeCoefficients::with(double eps, int n) const {
    PerturbativeCoefficients copy = *this;
    copy.epsilon = eps;
    copy.pulses = n;
    return copy;
}

PerturbativeCoefficients perturbative_coefficients(const PulseShape &shape, double epsilon, int pulses) {
    validate(shape);
    PerturbativeCoefficients c;
    c.shape = shape.with_amplitude(1.0);
    c.rabi_rate = rabi_normalization(c.shape);
    c.epsilon = epsilon;
    c.pulses = pulses;

    const std::array<double, 2> breaks{c.shape.ramp, c.shape.duration - c.shape.ramp};
    const double omega = c.rabi_rate;
    const PulseShape &a2pi = c.shape;
    c.ax = adaptive_simpson_piecewise([&](double t) { return omega * envelope_at(a2pi, t); }, 0.0, a2pi.duration,
                                      breaks, kQuadTolerance)
               .value;
    auto weight = [&](double t) {
        const double a = envelope_at(a2pi, t);
        return omega * a * (a - 1.0);
    };
    c.ay = adaptive_simpson_piecewise([&](double t) { return weight(t) * std::cos(c.theta(t)); }, 0.0,
                                      a2pi.duration, breaks, kQuadTolerance)
               .value;
    const double companion = adaptive_simpson_piecewise([&](double t) { return weight(t) * std::sin(c.theta(t)); },
                                                        0.0, a2pi.duration, breaks, kQuadTolerance)
                                 .value;
    if (std::abs(companion) > kSymmetryTolerance) {
        throw Error(ErrorKind::Symmetry, "sine-weighted integral does not vanish: pulse is not symmetric");
    }
    return c;
}

double perturbative_survival(const PerturbativeCoefficients &coeffs, double phase_slope) {
    const double angle = coeffs.pulses * std::hypot(coeffs.epsilon * coeffs.ax, phase_slope * coeffs.ay);
    return 0.5 * (1.0 + std::cos(angle));
}

Su2Matrix perturbative_pulse_unitary(const PerturbativeCoefficients &coeffs, double phase_slope) {
    const double x = coeffs.epsilon * coeffs.ax;
    const double y = phase_slope * coeffs.ay;
    const double angle = std::hypot(x, y);
    if (angle == 0.0) {
        return Su2Matrix::Identity();
    }
    return equatorial_rotation(std::atan2(y, x), angle);
}

Su2Matrix first_order_unitary(const PerturbativeCoefficients &coeffs, double phase_slope) {
    const std::complex<double> i{0.0, 1.0};
    return -Su2Matrix::Identity() +
           0.5 * i * (coeffs.epsilon * coeffs.ax * pauli_x() + phase_slope * coeffs.ay * pauli_y());
}

SensitivityExpansion sensitivity_expansions(const PerturbativeCoefficients &coeffs, double phase_slope) {
    const double x = coeffs.pulses * phase_slope * coeffs.ay;
    SensitivityExpansion out;
    out.quadratic = 1.0 - 0.25 * x * x;
    out.quartic = 1.0 - x * x * x * x / (64.0 * kPi * kPi);
    return out;
}

DecoherenceEstimate decoherence_survival(const PerturbativeCoefficients &coeffs, double phase_slope,
                                         double duration, double t2) {
    if (!(t2 > 0.0)) {
        throw Error(ErrorKind::Config, "T2 must be positive", "NoiseModel.T2");
    }
    const double n = coeffs.pulses;
    DecoherenceEstimate out;
    out.phase_deficit = 0.25 * n * n * phase_slope * phase_slope * coeffs.ay * coeffs.ay;
    out.dephasing_deficit = n * duration / (4.0 * t2);
    out.survival = 1.0 - out.phase_deficit - out.dephasing_deficit;
    out.sensitivity_ratio = std::abs(phase_slope) * t2 / duration;
    out.sensitivity_satisfied = out.sensitivity_ratio >= kSensitivityMargin;
    out.coherent_regime = n * duration <= 0.1 * t2;
    return out;
}

}  // namespace pdcal
