#include "pdcal/benchmarking.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pdcal/error.h"

using namespace pdcal;

namespace {

PulseShape paper_pulse(double a = 1.0) { return PulseShape::make(1.2e-6, 200e-9, a); }

constexpr DecompositionStrategy kStrategies[] = {DecompositionStrategy::PiAndPiHalf,
                                                 DecompositionStrategy::PiHalfOnly,
                                                 DecompositionStrategy::DoubleDurationPi};

RbConfig base_config(double native_slope = 0.0) {
    RbConfig c;
    c.pulse = paper_pulse();
    c.chain = DriveChain::with_native_slope(c.pulse, native_slope);
    c.lengths = {1, 4, 16, 64, 256, 1024};
    c.randomizations = 5;
    return c;
}

Su2Matrix ideal_product(const RbSequence &seq) {
    const CliffordGroup &g = clifford_table();
    Su2Matrix u = Su2Matrix::Identity();
    for (int c : seq.cliffords) {
        u = g[c].unitary * u;
    }
    return g[seq.recovery].unitary * u;
}

}  // namespace

TEST(CliffordGroup, TwentyFourDistinctElements) {
    const CliffordGroup &g = clifford_table();
    ASSERT_EQ(g.size(), 24u);
    EXPECT_GE(gate_fidelity(g[0].unitary, Su2Matrix::Identity()), 1.0 - 1e-15);
    for (int a = 0; a < 24; a++) {
        for (int b = a + 1; b < 24; b++) {
            EXPECT_LT(gate_fidelity(g[a].unitary, g[b].unitary), 1.0 - 1e-3);
        }
    }
}

TEST(CliffordGroup, ClosedUnderMultiplication) {
    const CliffordGroup &g = clifford_table();
    for (int a = 0; a < 24; a++) {
        for (int b = 0; b < 24; b++) {
            const Su2Matrix prod = g[a].unitary * g[b].unitary;
            int match = -1;
            for (int c = 0; c < 24; c++) {
                if (gate_fidelity(prod, g[c].unitary) > 1.0 - 1e-12) {
                    match = c;
                }
            }
            ASSERT_GE(match, 0);
            EXPECT_EQ(g.multiply(a, b), match);
        }
    }
}

TEST(CliffordGroup, InversesExist) {
    const CliffordGroup &g = clifford_table();
    for (int a = 0; a < 24; a++) {
        const int inv = g.inverse(a);
        EXPECT_GE(gate_fidelity(g[inv].unitary * g[a].unitary, Su2Matrix::Identity()), 1.0 - 1e-12);
    }
    EXPECT_EQ(g.find(rx(0.3)), -1);
}

TEST(Decomposition, RecomposesEveryElement) {
    for (DecompositionStrategy s : kStrategies) {
        for (int c = 0; c < 24; c++) {
            EXPECT_GE(gate_fidelity(compose_ops(decompose_clifford(c, s)), clifford_table()[c].unitary), 1.0 - 1e-12)
                << to_string(s) << " " << c;
        }
    }
}

TEST(Decomposition, IdentityHasNoPhysicalPulse) {
    for (DecompositionStrategy s : kStrategies) {
        EXPECT_EQ(physical_pulse_count(decompose_clifford(0, s)), 0);
    }
}

TEST(Decomposition, PulseBudgets) {
    for (int c = 0; c < 24; c++) {
        EXPECT_LE(physical_pulse_count(decompose_clifford(c, DecompositionStrategy::PiAndPiHalf)), 1);
        for (const GateOp &op : decompose_clifford(c, DecompositionStrategy::PiHalfOnly)) {
            EXPECT_FALSE(op.virtual_z);
            EXPECT_NEAR(op.angle, 0.5 * kPi, 1e-15);
        }
    }
}

TEST(Decomposition, MeanPulseCounts) {
    EXPECT_DOUBLE_EQ(mean_pulse_count(DecompositionStrategy::PiAndPiHalf), 20.0 / 24.0);
    EXPECT_DOUBLE_EQ(mean_pulse_count(DecompositionStrategy::PiHalfOnly), 52.0 / 24.0);
    EXPECT_DOUBLE_EQ(mean_pulse_count(DecompositionStrategy::DoubleDurationPi), 20.0 / 24.0);
    // "≈1" and "≈2.2", read to the stated precision.
    EXPECT_NEAR(mean_pulse_count(DecompositionStrategy::PiAndPiHalf), 1.0, 0.2);
    EXPECT_NEAR(mean_pulse_count(DecompositionStrategy::PiHalfOnly), 2.2, 0.05);
}

TEST(Decomposition, BadIndexAndStrategyName) {
    EXPECT_THROW(decompose_clifford(24, DecompositionStrategy::PiAndPiHalf), Error);
    try {
        parse_strategy("PiOnly");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
        EXPECT_EQ(e.key(), "RbConfig.strategy");
    }
    for (DecompositionStrategy s : kStrategies) {
        EXPECT_EQ(parse_strategy(to_string(s)), s);
    }
}

TEST(PulseCalibration, AmplitudeRatioAndDurations) {
    const PulseShape base = paper_pulse();
    const PulseCalibration p = calibrate_pulses(DriveChain::ideal(base), base);
    EXPECT_NEAR(p.pi.amplitude / p.half.amplitude, 2.0, 1e-12);
    EXPECT_NEAR(p.half.amplitude, 0.25, 1e-12);
    EXPECT_EQ(p.long_pi.duration, 2.0 * base.duration);
    EXPECT_NEAR(rabi_normalization(PulseShape::make(1.2e-6, 200e-9, 1.0)) * p.long_pi.amplitude *
                    (p.long_pi.duration - p.long_pi.ramp),
                kPi, 1e-9);
}

TEST(Compile, DoubleDurationUsesLongPiPulses) {
    const PulseShape base = paper_pulse();
    const PulseCalibration p = calibrate_pulses(DriveChain::ideal(base), base);
    RbSequence seq;
    for (int c = 0; c < 24; c++) {
        seq.cliffords.push_back(c);
    }
    seq.recovery = 0;
    std::set<double> pi_durations;
    for (const PhysicalPulse &pulse : compile_sequence(seq, DecompositionStrategy::DoubleDurationPi, p)) {
        if (std::abs(pulse.area - kPi) < 1e-12) {
            pi_durations.insert(pulse.duration);
        } else {
            EXPECT_EQ(pulse.duration, base.duration);
        }
    }
    ASSERT_EQ(pi_durations.size(), 1u);
    EXPECT_EQ(*pi_durations.begin(), 2.0 * base.duration);
}

TEST(Compile, IdealCompiledSequenceIsIdentity) {
    const PulseShape base = paper_pulse();
    const PulseCalibration p = calibrate_pulses(DriveChain::ideal(base), base);
    for (DecompositionStrategy s : kStrategies) {
        for (std::uint64_t seed = 1; seed <= 20; seed++) {
            const RbSequence seq = generate_rb_sequence(30, seed);
            Su2Matrix u = Su2Matrix::Identity();
            for (const PhysicalPulse &pulse : compile_sequence(seq, s, p)) {
                u = equatorial_rotation(pulse.phase, pulse.area) * u;
            }
            // Pending frame updates after the last pulse commute with |0⟩⟨0|.
            EXPECT_NEAR(std::norm(u(0, 0)), 1.0, 1e-12);
        }
    }
}

TEST(Sequence, EmptyHasIdentityRecovery) {
    const RbSequence seq = generate_rb_sequence(0, 5);
    EXPECT_TRUE(seq.cliffords.empty());
    EXPECT_EQ(seq.recovery, 0);
}

TEST(Sequence, NetUnitaryIsIdentity) {
    for (int m : {1, 2, 17, 500}) {
        for (std::uint64_t seed = 1; seed <= 10; seed++) {
            const RbSequence seq = generate_rb_sequence(m, seed);
            ASSERT_EQ(seq.cliffords.size(), static_cast<std::size_t>(m));
            EXPECT_GE(gate_fidelity(ideal_product(seq), Su2Matrix::Identity()), 1.0 - 1e-12);
        }
    }
}

TEST(Sequence, DeterministicInSeed) {
    const RbSequence a = generate_rb_sequence(100, 42);
    const RbSequence b = generate_rb_sequence(100, 42);
    const RbSequence c = generate_rb_sequence(100, 43);
    EXPECT_EQ(a.cliffords, b.cliffords);
    EXPECT_EQ(a.recovery, b.recovery);
    EXPECT_NE(a.cliffords, c.cliffords);
}

TEST(Sequence, UniformOverGroup) {
    const RbSequence seq = generate_rb_sequence(24000, 3);
    std::array<int, 24> counts{};
    for (int c : seq.cliffords) {
        counts[c]++;
    }
    for (int n : counts) {
        EXPECT_NEAR(n, 1000, 150);
    }
}

TEST(GeometricLengths, Ladder) {
    EXPECT_EQ(geometric_lengths(16), (std::vector<int>{1, 2, 4, 8, 16}));
    EXPECT_EQ(geometric_lengths(20), (std::vector<int>{1, 2, 4, 8, 16, 20}));
    const auto l = geometric_lengths(1000, 3.0);
    EXPECT_EQ(l.front(), 1);
    EXPECT_EQ(l.back(), 1000);
    for (std::size_t k = 1; k < l.size(); k++) {
        EXPECT_GT(l[k], l[k - 1]);
    }
}

TEST(RbConfig, ValidationKeys) {
    auto key_of = [](const RbConfig &c) {
        try {
            validate(c);
        } catch (const Error &e) {
            return e.key();
        }
        return std::string();
    };
    RbConfig c = base_config();
    EXPECT_EQ(key_of(c), "");
    c.lengths = {1, 4, 4};
    EXPECT_EQ(key_of(c), "RbConfig.lengths");
    c = base_config();
    c.lengths = {0, 2};
    EXPECT_EQ(key_of(c), "RbConfig.lengths");
    c = base_config();
    c.randomizations = 1;
    EXPECT_EQ(key_of(c), "RbConfig.randomizations");
    c = base_config();
    c.depolarizing = 1.5;
    EXPECT_EQ(key_of(c), "RbConfig.depolarizing");
    c = base_config();
    c.shots = -1;
    EXPECT_EQ(key_of(c), "RbConfig.shots");
}

TEST(SimulateRb, NoDistortionSurvivesPerfectly) {
    for (DecompositionStrategy s : kStrategies) {
        RbConfig c = base_config();
        c.strategy = s;
        const RbTable t = simulate_rb(c);
        ASSERT_EQ(t.survival.size(), c.lengths.size());
        for (const auto &row : t.survival) {
            ASSERT_EQ(row.size(), 5u);
            for (double p : row) {
                EXPECT_NEAR(p, 1.0, 1e-9) << to_string(s);
            }
        }
    }
}

TEST(SimulateRb, CacheMatchesDirectPropagation) {
    for (DecompositionStrategy s : {DecompositionStrategy::PiAndPiHalf, DecompositionStrategy::PiHalfOnly}) {
        RbConfig cached = base_config(turns(1.8e-3));
        cached.strategy = s;
        RbConfig direct = cached;
        direct.use_cache = false;
        for (std::uint64_t seed = 1; seed <= 100; seed++) {
            const RbSequence seq = generate_rb_sequence(100, seed);
            EXPECT_NEAR(sequence_survival(cached, seq), sequence_survival(direct, seq), 1e-9);
        }
    }
}

TEST(SimulateRb, CacheMatchesDirectWithDephasing) {
    RbConfig cached = base_config(turns(1.8e-3));
    cached.noise.t2 = 2e-3;
    RbConfig direct = cached;
    direct.use_cache = false;
    for (std::uint64_t seed = 1; seed <= 5; seed++) {
        const RbSequence seq = generate_rb_sequence(40, seed);
        EXPECT_NEAR(sequence_survival(cached, seq), sequence_survival(direct, seq), 1e-9);
    }
}

TEST(SimulateRb, ThreadsDoNotChangeResults) {
    RbConfig c = base_config(turns(1.8e-3));
    c.shots = 200;
    RbConfig t = c;
    t.threads = 4;
    EXPECT_EQ(simulate_rb(c).survival, simulate_rb(t).survival);
}

TEST(SimulateRb, DistortionDecaysAndCompensationRestores) {
    const double native = turns(1.8e-3);
    RbConfig c = base_config(native);
    c.lengths = geometric_lengths(1 << 17, 4.0);
    c.randomizations = 8;
    const RbTable raw = simulate_rb(c);
    EXPECT_LT(raw.mean.back(), 0.999);
    const RbFit fit = fit_rb_decay(raw, {kUnitalAsymptote});
    EXPECT_GT(fit.error_per_clifford, 1e-7);

    c.chain = c.chain.with_compensation_slope(-native);
    const RbFit compensated = fit_rb_decay(simulate_rb(c), {kUnitalAsymptote});
    EXPECT_LT(compensated.error_per_clifford, 1e-8);
    EXPECT_GE(fit.error_per_clifford, 3.0 * compensated.error_per_clifford);
}

TEST(SimulateRb, DepolarizingOracle) {
    for (double r : {1e-3, 1e-4}) {
        RbConfig c = base_config();
        c.depolarizing = r;
        c.lengths = geometric_lengths(static_cast<int>(4.0 / r), 2.0);
        const RbFit fit = fit_rb_decay(simulate_rb(c));
        EXPECT_NEAR(fit.error_per_clifford / (r / 2.0), 1.0, 0.05) << r;
    }
}

TEST(FitRbDecay, ExactSyntheticData) {
    const std::vector<int> m{1, 3, 10, 30, 100, 300, 1000};
    const double a = 0.47, p = 0.997, b = 0.51;
    std::vector<double> y;
    for (int k : m) {
        y.push_back(a * std::pow(p, k) + b);
    }
    const RbFit fit = fit_rb_decay(m, y);
    EXPECT_NEAR(fit.p, p, 1e-10);
    EXPECT_NEAR(fit.amplitude, a, 1e-10);
    EXPECT_NEAR(fit.offset, b, 1e-10);
    EXPECT_NEAR(fit.error_per_clifford, (1 - p) / 2, 1e-10);
    EXPECT_FALSE(fit.p_clamped);
    EXPECT_NEAR(fit.sigma_p, 0.0, 1e-9);
}

TEST(FitRbDecay, FixedOffsetExactData) {
    const std::vector<int> m{1, 10, 100, 1000, 10000};
    std::vector<double> y;
    for (int k : m) {
        y.push_back(0.5 * std::pow(1 - 2e-6, k) + 0.5);
    }
    const RbFit fit = fit_rb_decay(m, y, {kUnitalAsymptote});
    EXPECT_EQ(fit.offset, 0.5);
    EXPECT_NEAR(fit.error_per_clifford, 1e-6, 1e-15);
}

TEST(FitRbDecay, NonDecayingDataClampsP) {
    const RbFit fit = fit_rb_decay({1, 10, 100, 1000}, {0.993, 0.993, 0.993, 0.993});
    EXPECT_TRUE(fit.p_clamped);
    EXPECT_EQ(fit.p, 1.0);
    EXPECT_EQ(fit.error_per_clifford, 0.0);
}

TEST(FitRbDecay, NeedsThreeLengths) {
    EXPECT_THROW(fit_rb_decay({1, 2}, {1.0, 0.9}), Error);
}

TEST(FitRbDecay, OffsetIsBounded) {
    const std::vector<int> m{1, 3, 10, 30, 100};
    std::vector<double> y;
    for (int k : m) {
        y.push_back(0.4 * std::pow(0.9, k) + 1.1);
    }
    const RbFit fit = fit_rb_decay(m, y);
    EXPECT_LE(fit.offset, 1.0);
    EXPECT_TRUE(fit.offset_clamped);
}

TEST(FitRbDecay, BootstrapGivesErrorBar) {
    RbConfig c = base_config();
    c.depolarizing = 1e-3;
    c.shots = 100;
    c.randomizations = 10;
    c.lengths = geometric_lengths(4096);
    const RbTable t = simulate_rb(c);
    const RbFit a = fit_rb_decay_bootstrap(t, 50, 7);
    const RbFit b = fit_rb_decay_bootstrap(t, 50, 7);
    EXPECT_GT(a.bootstrap_sigma_error, 0.0);
    EXPECT_EQ(a.bootstrap_sigma_error, b.bootstrap_sigma_error);
    EXPECT_GT(a.sigma_error, 0.0);
}

TEST(CompensationScan, CommonSequencesAcrossSlopes) {
    const double native = turns(1.8e-3);
    RbConfig c = base_config(native);
    c.lengths = geometric_lengths(1 << 14, 4.0);
    const std::vector<double> slopes{-native - turns(1e-3), -native, -native + turns(1e-3)};
    const auto scan = rb_compensation_scan(c, slopes, 0, {kUnitalAsymptote});
    ASSERT_EQ(scan.size(), 3u);
    EXPECT_EQ(scan[1].compensation_slope, -native);
    EXPECT_LT(scan[1].fit.error_per_clifford, scan[0].fit.error_per_clifford);
    EXPECT_LT(scan[1].fit.error_per_clifford, scan[2].fit.error_per_clifford);
    EXPECT_THROW(rb_compensation_scan(c, {}), Error);
}
