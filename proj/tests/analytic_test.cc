#include "pdcal/analytic.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pdcal/error.h"

using namespace pdcal;

namespace {

PulseShape paper_pulse(double a = 1.0) { return PulseShape::make(1.2e-6, 200e-9, a); }
PulseShape full_sin2() { return PulseShape::make(1.0e-6, 0.5e-6, 1.0); }

// Gauss-Legendre on uniform panels. θ(t) is integrated separately on the same rule so
// nothing is shared with the library's closed-form envelope integral.
struct GaussLegendre {
    static constexpr double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                    0.9061798459386640};
    static constexpr double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};

    template <class F>
    static double integrate(F f, double lo, double hi, int panels) {
        const double h = (hi - lo) / panels;
        double sum = 0.0;
        for (int p = 0; p < panels; p++) {
            const double mid = lo + (p + 0.5) * h;
            for (int k = 0; k < 5; k++) {
                sum += 0.5 * h * w[k] * f(mid + 0.5 * h * x[k]);
            }
        }
        return sum;
    }
};

double oracle_ay(const PulseShape &s) {
    const double omega = rabi_normalization(s);
    auto a = [&](double t) { return envelope_at(s, t); };
    const double breaks[4] = {0.0, s.ramp, s.duration - s.ramp, s.duration};
    auto theta = [&](double t) {
        double sum = 0.0;
        for (int seg = 0; seg < 3 && breaks[seg] < t; seg++) {
            sum += GaussLegendre::integrate(a, breaks[seg], std::min(t, breaks[seg + 1]), 4);
        }
        return omega * sum;
    };
    double sum = 0.0;
    for (int seg = 0; seg < 3; seg++) {
        sum += GaussLegendre::integrate([&](double t) { return omega * a(t) * (a(t) - 1.0) * std::cos(theta(t)); },
                                        breaks[seg], breaks[seg + 1], 200);
    }
    return sum;
}

Su2Matrix random_su2(std::mt19937_64 &rng) {
    std::normal_distribution<double> n;
    double q[4];
    double norm = 0.0;
    for (double &v : q) {
        v = n(rng);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    const std::complex<double> a{q[0] / norm, q[1] / norm}, b{q[2] / norm, q[3] / norm};
    Su2Matrix u;
    u << a, -std::conj(b), b, std::conj(a);
    return u;
}

// Chain whose phase is zero on the plateau of `shape`.
DriveChain plateau_referenced(const PulseShape &shape, double slope) {
    DriveChain c = DriveChain::ideal(shape);
    c.native = PhasePolynomial::linear(slope, -slope * shape.amplitude);
    return c;
}

}  // namespace

TEST(RampRotation, ZeroPhaseHasNoYComponent) {
    const PulseShape s = paper_pulse(0.8);
    const RampRotation r = ramp_rotation_integrals(DriveChain::ideal(s), s);
    EXPECT_EQ(r.ry, 0.0);
    EXPECT_NEAR(r.rx, rabi_normalization(s) * 0.8 * s.ramp / 2.0, 1e-10);
}

TEST(RampRotation, PositiveSlopeGivesNegativeRy) {
    const PulseShape s = paper_pulse(1.0);
    EXPECT_LT(ramp_rotation_integrals(plateau_referenced(s, 0.05), s).ry, 0.0);
    EXPECT_GT(ramp_rotation_integrals(plateau_referenced(s, -0.05), s).ry, 0.0);
}

TEST(TaitBryan, Examples) {
    const RotationAngles flat = tait_bryan_ramp_angles({1.3, 0.0});
    EXPECT_EQ(flat.x, 1.3);
    EXPECT_EQ(flat.y, 0.0);
    EXPECT_EQ(flat.z, 0.0);

    const RotationAngles quarter = tait_bryan_ramp_angles({0.5 * kPi, 0.01});
    EXPECT_NEAR(quarter.y, 0.02 / kPi, 1e-15);
    EXPECT_NEAR(quarter.z, -0.02 / kPi, 1e-15);
    EXPECT_NEAR(quarter.y, 6.366e-3, 1e-6);

    const RotationAngles tiny = tait_bryan_ramp_angles({0.0, 0.01});
    EXPECT_EQ(tiny.x, 0.0);
    EXPECT_EQ(tiny.y, 0.01);
    EXPECT_EQ(tiny.z, 0.0);
    const RotationAngles near_zero = tait_bryan_ramp_angles({1e-8, 0.01});
    EXPECT_NEAR(near_zero.y, 0.01, 1e-15);
    EXPECT_NEAR(near_zero.z, 0.0, 1e-9);
}

TEST(EulerDecompose, PureXRotation) {
    const EulerDecomposition d = zyx_euler_decompose(rx(0.7));
    EXPECT_NEAR(d.angles.x, 0.7, 1e-14);
    EXPECT_NEAR(d.angles.y, 0.0, 1e-14);
    EXPECT_NEAR(d.angles.z, 0.0, 1e-14);
    EXPECT_FALSE(d.gimbal_degenerate);
}

TEST(EulerDecompose, RandomRoundTrip) {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 500; k++) {
        const Su2Matrix u = random_su2(rng);
        const EulerDecomposition d = zyx_euler_decompose(u);
        EXPECT_GE(gate_fidelity(u, compose_xyz(d.angles)), 1.0 - 1e-12);
        EXPECT_LE(std::abs(d.angles.y), 0.5 * kPi + 1e-15);
    }
}

TEST(EulerDecompose, GimbalLockIsFlagged) {
    const Su2Matrix u = rx(0.4) * ry(0.5 * kPi) * rz(0.3);
    const EulerDecomposition d = zyx_euler_decompose(u);
    EXPECT_TRUE(d.gimbal_degenerate);
    EXPECT_EQ(d.angles.z, 0.0);
    EXPECT_GE(gate_fidelity(u, compose_xyz(d.angles)), 1.0 - 1e-12);
}

TEST(EulerDecompose, TiltedRampAgreesWithFirstOrderAngles) {
    // Ramp driven about an axis tilted by δ out of x: r_y = δ·r_x spread evenly.
    const PulseShape s = paper_pulse(1.0);
    const DriveChain c = DriveChain::ideal(s);
    const double rx_total = ramp_rotation_integrals(c, s).rx;
    auto deviation = [&](double tilt) {
        const Su2Matrix up = propagate_segment(c, s, tilt, 0.0, s.ramp);
        const RotationAngles exact = zyx_euler_decompose(up).angles;
        const RotationAngles first =
            tait_bryan_ramp_angles({rx_total * std::cos(tilt), rx_total * std::sin(tilt)});
        return std::max({std::abs(exact.x - first.x), std::abs(exact.y - first.y), std::abs(exact.z - first.z)});
    };
    const double d1 = deviation(0.02);
    const double d2 = deviation(0.01);
    EXPECT_LT(d1, 0.05 * 0.02 * rx_total);
    EXPECT_GE(d1 / d2, 3.5);
}

TEST(EulerDecompose, LinearPhaseRampDeviatesAtFirstOrder) {
    // A linear chain concentrates r_y early in the ramp, so the evenly spread
    // first-order angles are off by O(r_y).
    const PulseShape s = paper_pulse(1.0);
    auto deviation = [&](double slope) {
        const DriveChain c = plateau_referenced(s, slope);
        const RotationAngles exact = zyx_euler_decompose(propagate_segment(c, s, 0.0, 0.0, s.ramp)).angles;
        const RotationAngles first = tait_bryan_ramp_angles(ramp_rotation_integrals(c, s));
        return std::max({std::abs(exact.x - first.x), std::abs(exact.y - first.y), std::abs(exact.z - first.z)});
    };
    EXPECT_NEAR(deviation(0.2) / deviation(0.1), 2.0, 0.05);
}

TEST(PerturbativeCoefficients, AxIsTwoPi) {
    for (const PulseShape &s : {paper_pulse(), full_sin2(), PulseShape::make(3e-6, 0.1e-6, 1.0)}) {
        const PerturbativeCoefficients c = perturbative_coefficients(s);
        EXPECT_NEAR(c.ax, kTwoPi, 1e-10);
        EXPECT_NEAR(c.theta(s.duration), kTwoPi, 1e-12);
    }
}

TEST(PerturbativeCoefficients, FullSinSquaredAyIsNearOne) {
    EXPECT_NEAR(std::abs(perturbative_coefficients(full_sin2()).ay), 1.0, 0.05);
}

TEST(PerturbativeCoefficients, AyMatchesIndependentQuadrature) {
    for (const PulseShape &s : {paper_pulse(), full_sin2(), PulseShape::make(2e-6, 0.3e-6, 1.0)}) {
        EXPECT_NEAR(perturbative_coefficients(s).ay, oracle_ay(s), 1e-9);
    }
    EXPECT_NEAR(perturbative_coefficients(paper_pulse()).ay, -0.308722359405863, 1e-9);
}

TEST(PerturbativeCoefficients, IgnoresAmplitudeOfProfile) {
    EXPECT_DOUBLE_EQ(perturbative_coefficients(paper_pulse(0.3)).ay, perturbative_coefficients(paper_pulse()).ay);
}

TEST(PerturbativeSurvival, Examples) {
    const PerturbativeCoefficients c = perturbative_coefficients(paper_pulse(), 0.0, 200);
    EXPECT_EQ(perturbative_survival(c, 0.0), 1.0);
    EXPECT_NEAR(perturbative_survival(c, kPi / (200 * c.ay)), 0.0, 1e-15);
    EXPECT_NEAR(perturbative_survival(c.with(1.0 / 200, 200), 0.0), 1.0, 1e-15);
}

TEST(PerturbativeSurvival, ComposedGeneratorsMatchClosedForm) {
    const PerturbativeCoefficients base = perturbative_coefficients(paper_pulse());
    for (double eps : {0.0, 1e-3, -4e-3}) {
        for (double slope : {0.0, 0.01, -0.03}) {
            for (int n : {1, 7, 200}) {
                const PerturbativeCoefficients c = base.with(eps, n);
                const Su2Matrix single = perturbative_pulse_unitary(c.with(eps, 1), slope);
                Su2Matrix u = Su2Matrix::Identity();
                for (int k = 0; k < n; k++) {
                    u = single * u;
                }
                EXPECT_NEAR(survival_probability(u), perturbative_survival(c, slope), 1e-12);
            }
        }
    }
}

TEST(SensitivityExpansions, Examples) {
    const PerturbativeCoefficients c = perturbative_coefficients(paper_pulse(), 0.0, 200);
    const SensitivityExpansion zero = sensitivity_expansions(c, 0.0);
    EXPECT_EQ(zero.quadratic, 1.0);
    EXPECT_EQ(zero.quartic, 1.0);
    const double slope = 0.2 / (200 * c.ay);
    const SensitivityExpansion e = sensitivity_expansions(c, slope);
    EXPECT_NEAR(1.0 - e.quadratic, 0.01, 1e-15);
    EXPECT_NEAR(1.0 - e.quartic, 2.53e-6, 1e-8);
    EXPECT_NEAR((1.0 - e.quartic) / (std::pow(0.2, 4) / (64 * kPi * kPi)), 1.0, 1e-9);
}

TEST(SensitivityExpansions, AgreeWithClosedFormAtSmallAngle) {
    const PerturbativeCoefficients c = perturbative_coefficients(paper_pulse(), 0.0, 200);
    const double slope = 0.02 / (200 * c.ay);
    // ½(1 + cos x) = 1 − x²/4 + x⁴/48 − …
    EXPECT_NEAR(perturbative_survival(c, slope) - sensitivity_expansions(c, slope).quadratic, std::pow(0.02, 4) / 48,
                1e-13);
    const PerturbativeCoefficients shifted = c.with(1.0 / 200, 200);
    EXPECT_NEAR(sensitivity_expansions(shifted, slope).quartic, perturbative_survival(shifted, slope), 1e-10);
}

TEST(DecoherenceSurvival, Examples) {
    const PulseShape s = paper_pulse();
    const PerturbativeCoefficients c = perturbative_coefficients(s, 0.0, 200);
    const double slope = turns(1e-4);
    const DecoherenceEstimate inf = decoherence_survival(c, slope, s.duration, INFINITY);
    EXPECT_DOUBLE_EQ(inf.survival, sensitivity_expansions(c, slope).quadratic);
    const DecoherenceEstimate flat = decoherence_survival(c, 0.0, s.duration, 1e-3);
    EXPECT_DOUBLE_EQ(flat.survival, 1.0 - 200 * s.duration / (4.0 * 1e-3));
    const DecoherenceEstimate cond = decoherence_survival(c, 1e3 * s.duration / 1e-3, s.duration, 1e-3);
    EXPECT_NEAR(cond.sensitivity_ratio, 1e3, 1e-9);
    EXPECT_TRUE(cond.sensitivity_satisfied);
    EXPECT_FALSE(decoherence_survival(c, 10 * s.duration / 1e-3, s.duration, 1e-3).sensitivity_satisfied);
    EXPECT_TRUE(decoherence_survival(c, 0.0, s.duration, 1.0).coherent_regime);
    EXPECT_FALSE(flat.coherent_regime);
}

TEST(DecoherenceSurvival, NonPositiveT2IsConfigError) {
    const PerturbativeCoefficients c = perturbative_coefficients(paper_pulse());
    try {
        decoherence_survival(c, 0.0, 1e-6, 0.0);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(Perturbative, ExactTrainConvergesToClosedForm) {
    const PulseShape s = paper_pulse(1.0);
    const int n = 200;
    const PerturbativeCoefficients base = perturbative_coefficients(s);
    auto worst = [&](double scale) {
        double out = 0.0;
        for (int i = -3; i <= 3; i++) {
            for (int j = -3; j <= 3; j++) {
                const double eps = scale * i * (1.0 / n) / 3.0;
                const double slope = scale * j * turns(4e-3) / 3.0;
                const DriveChain c = DriveChain::with_native_slope(s, slope);
                const double exact =
                    survival_probability(propagate_train(c, PulseTrain::uniform(s.with_amplitude(1.0 + eps), n)));
                out = std::max(out, std::abs(exact - perturbative_survival(base.with(eps, n), slope)));
            }
        }
        return out;
    };
    const double w1 = worst(1.0);
    const double w2 = worst(0.5);
    EXPECT_GE(w1 / w2, 4.0 * 0.875);
}

TEST(Perturbative, LogLogSlopes) {
    const PulseShape s = paper_pulse(1.0);
    const int n = 200;
    auto deficit = [&](double amplitude, double slope) {
        const DriveChain c = DriveChain::with_native_slope(s, slope);
        return survival_deficit(propagate_train(c, PulseTrain::uniform(s.with_amplitude(amplitude), n)));
    };
    const double lo = turns(1e-5), hi = turns(1e-4);
    const double quadratic = std::log(deficit(1.0, hi) / deficit(1.0, lo)) / std::log(hi / lo);
    EXPECT_NEAR(quadratic, 2.0, 0.1);
    const double a = (n + 1.0) / n;
    const double quartic = std::log(deficit(a, hi) / deficit(a, lo)) / std::log(hi / lo);
    EXPECT_NEAR(quartic, 4.0, 0.2);
}

TEST(Duality, RampDownMirrorsRampUp) {
    const PulseShape s = paper_pulse(1.0);
    const DriveChain c = plateau_referenced(s, 0.05);
    const Su2Matrix up = propagate_segment(c, s, 0.0, 0.0, s.ramp);
    const Su2Matrix down = propagate_segment(c, s, 0.0, s.duration - s.ramp, s.duration);
    const RotationAngles e = zyx_euler_decompose(up).angles;
    EXPECT_NE(e.z, 0.0);
    // Ramp-down applies X, then Y, then the opposite z-rotation.
    EXPECT_GE(gate_fidelity(down, rz(-e.z) * ry(e.y) * rx(e.x)), 1.0 - 1e-12);
}

TEST(Duality, InterPulseZRotationsCancel) {
    const PulseShape s = paper_pulse(1.0);
    const DriveChain c = plateau_referenced(s, 0.05);
    const Su2Matrix up = propagate_segment(c, s, 0.0, 0.0, s.ramp);
    const Su2Matrix mid = propagate_segment(c, s, 0.0, s.ramp, s.duration - s.ramp);
    const Su2Matrix down = propagate_segment(c, s, 0.0, s.duration - s.ramp, s.duration);
    const RotationAngles e = zyx_euler_decompose(up).angles;

    // Down of pulse 1 followed by up of pulse 2: Z(αz)·Z(−αz) leaves X·Y·Y·X.
    EXPECT_GE(gate_fidelity(up * down, rx(e.x) * ry(2.0 * e.y) * rx(e.x)), 1.0 - 1e-12);
    const Su2Matrix model = rz(-e.z) * ry(e.y) * rx(e.x) * mid * rx(e.x) * ry(2.0 * e.y) * rx(e.x) * mid *
                            rx(e.x) * ry(e.y) * rz(e.z);
    EXPECT_GE(gate_fidelity(propagate_train(c, PulseTrain::uniform(s, 2)), model), 1.0 - 1e-12);
}
