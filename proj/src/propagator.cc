#include "pdcal/propagator.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "pdcal/error.h"

namespace pdcal {

using cd = std::complex<double>;

namespace {

constexpr cd kI{0.0, 1.0};

Eigen::Matrix2cd make_pauli(int which) {
    Eigen::Matrix2cd m;
    switch (which) {
        case 0:
            m << 0.0, 1.0, 1.0, 0.0;
            break;
        case 1:
            m << 0.0, -kI, kI, 0.0;
            break;
        default:
            m << 1.0, 0.0, 0.0, -1.0;
            break;
    }
    return m;
}

void check_step(double step) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw Error(ErrorKind::Config, "integration step must be positive", "experiment.step");
    }
}

void append_segment(std::vector<TimeSlice> &out, double a, double b, double step, bool constant, bool merge) {
    const double len = b - a;
    if (!(len > 0.0)) {
        return;
    }
    if (constant && merge) {
        out.push_back({a, len, true});
        return;
    }
    // The small slack keeps e.g. 200 ns / 1 ns at exactly 200 slices.
    const auto n = static_cast<long>(std::max(1.0, std::ceil(len / step - 1e-9)));
    const double width = len / static_cast<double>(n);
    for (long k = 0; k < n; k++) {
        out.push_back({a + static_cast<double>(k) * width, width, constant});
    }
}

std::vector<TimeSlice> slice_interval(const PulseShape &shape, double t0, double t1, double step, bool merge) {
    check_step(step);
    const double T = shape.duration;
    const double tr = shape.ramp;
    if (!(t0 >= 0.0 && t1 <= T && t0 <= t1)) {
        throw Error(ErrorKind::Domain, "segment outside the pulse window");
    }
    std::vector<TimeSlice> out;
    append_segment(out, t0, std::min(t1, tr), step, false, merge);
    append_segment(out, std::max(t0, tr), std::min(t1, T - tr), step, true, merge);
    append_segment(out, std::max(t0, T - tr), t1, step, false, merge);
    return out;
}

Su2Matrix slice_unitary(const DriveChain &chain, const PulseShape &shape, double frame_phase, const TimeSlice &s) {
    const double mid = std::min(s.start + 0.5 * s.width, shape.duration);
    const double field = chain.field_amplitude(envelope_at(shape, mid));
    const double phi = frame_phase + phase_at(chain, field);
    return equatorial_rotation(phi, chain.rabi_rate * field * s.width);
}

Su2Matrix propagate_slices(const DriveChain &chain, const PulseShape &shape, double frame_phase,
                           const std::vector<TimeSlice> &slices) {
    Su2Matrix u = Su2Matrix::Identity();
    for (const auto &s : slices) {
        u = slice_unitary(chain, shape, frame_phase, s) * u;
    }
    return u;
}

}  // namespace

const Eigen::Matrix2cd &pauli_x() {
    static const Eigen::Matrix2cd m = make_pauli(0);
    return m;
}
const Eigen::Matrix2cd &pauli_y() {
    static const Eigen::Matrix2cd m = make_pauli(1);
    return m;
}
const Eigen::Matrix2cd &pauli_z() {
    static const Eigen::Matrix2cd m = make_pauli(2);
    return m;
}

Su2Matrix equatorial_rotation(double azimuth, double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    Su2Matrix u;
    u << c, -kI * s * std::exp(-kI * azimuth), -kI * s * std::exp(kI * azimuth), c;
    return u;
}

Su2Matrix rx(double angle) { return equatorial_rotation(0.0, angle); }
Su2Matrix ry(double angle) { return equatorial_rotation(0.5 * kPi, angle); }

Su2Matrix rz(double angle) {
    Su2Matrix u;
    u << std::exp(-0.5 * kI * angle), 0.0, 0.0, std::exp(0.5 * kI * angle);
    return u;
}

double gate_fidelity(const Su2Matrix &u, const Su2Matrix &v) { return 0.5 * std::abs((u.adjoint() * v).trace()); }

double unitarity_error(const Su2Matrix &u) {
    return (u.adjoint() * u - Su2Matrix::Identity()).cwiseAbs().maxCoeff();
}

Su2Matrix project_su2(const Su2Matrix &u) {
    cd a = 0.5 * (u(0, 0) + std::conj(u(1, 1)));
    cd b = 0.5 * (u(1, 0) - std::conj(u(0, 1)));
    const double norm = std::sqrt(std::norm(a) + std::norm(b));
    a /= norm;
    b /= norm;
    Su2Matrix out;
    out << a, -std::conj(b), b, std::conj(a);
    return out;
}

Eigen::Matrix2cd hamiltonian_at(const DriveChain &chain, const PulseShape &shape, double frame_phase, double t) {
    const double field = chain.field_amplitude(envelope_at(shape, t));
    const double phi = frame_phase + phase_at(chain, field);
    const double scale = 0.5 * chain.rabi_rate * field;
    return scale * (std::cos(phi) * pauli_x() + std::sin(phi) * pauli_y());
}

std::vector<TimeSlice> slice_pulse(const PulseShape &shape, double step, bool merge_plateau) {
    return slice_interval(shape, 0.0, shape.duration, step, merge_plateau);
}

Su2Matrix propagate_pulse(const DriveChain &chain, const PulseShape &shape, double frame_phase, double step) {
    return propagate_slices(chain, shape, frame_phase, slice_pulse(shape, step, true));
}

Su2Matrix propagate_segment(const DriveChain &chain, const PulseShape &shape, double frame_phase, double t0,
                            double t1, double step) {
    return propagate_slices(chain, shape, frame_phase, slice_interval(shape, t0, t1, step, true));
}

Su2Matrix reframe(const Su2Matrix &u, double frame_phase) {
    Su2Matrix out = u;
    out(0, 1) *= std::exp(-kI * frame_phase);
    out(1, 0) *= std::exp(kI * frame_phase);
    return out;
}

Su2Matrix propagate_train(const DriveChain &chain, const PulseTrain &train, double step) {
    validate(train);
    const Su2Matrix base = propagate_pulse(chain, train.pulse, 0.0, step);
    Su2Matrix u = Su2Matrix::Identity();
    bool first = true;
    for (double frame : train.frame_phases) {
        u = (frame == 0.0 ? base : reframe(base, frame)) * u;
        if (!first) {
            u = project_su2(u);
        }
        first = false;
    }
    return u;
}

DensityMatrix propagate_density(const DriveChain &chain, const PulseTrain &train, const NoiseModel &noise,
                                double step, const DensityMatrix &initial) {
    validate(train);
    validate(noise);
    const auto slices = slice_pulse(train.pulse, step, !noise.dephasing());
    std::vector<Su2Matrix> base;
    std::vector<double> damping;
    base.reserve(slices.size());
    damping.reserve(slices.size());
    for (const auto &s : slices) {
        base.push_back(slice_unitary(chain, train.pulse, 0.0, s));
        damping.push_back(std::exp(-s.width / noise.t2));
    }
    const double gap_damping = std::exp(-train.gap / noise.t2);

    Eigen::Matrix2cd rho = initial.rho;
    for (std::size_t p = 0; p < train.frame_phases.size(); p++) {
        if (p > 0 && train.gap > 0.0) {
            rho(0, 1) *= gap_damping;
            rho(1, 0) *= gap_damping;
        }
        const double frame = train.frame_phases[p];
        for (std::size_t k = 0; k < base.size(); k++) {
            const Su2Matrix u = frame == 0.0 ? base[k] : reframe(base[k], frame);
            rho = u * rho * u.adjoint();
            rho(0, 1) *= damping[k];
            rho(1, 0) *= damping[k];
        }
    }
    return DensityMatrix{rho};
}

DensityMatrix propagate_density_pulse(const DriveChain &chain, const PulseShape &shape, double frame_phase,
                                      const NoiseModel &noise, const DensityMatrix &state, double step) {
    validate(noise);
    Eigen::Matrix2cd rho = state.rho;
    for (const auto &s : slice_pulse(shape, step, !noise.dephasing())) {
        const Su2Matrix u = slice_unitary(chain, shape, frame_phase, s);
        const double damping = std::exp(-s.width / noise.t2);
        rho = u * rho * u.adjoint();
        rho(0, 1) *= damping;
        rho(1, 0) *= damping;
    }
    return DensityMatrix{rho};
}

double survival_probability(const Su2Matrix &u, const NoiseModel &noise) {
    return apply_spam(noise, std::norm(u(0, 0)));
}

double survival_probability(const DensityMatrix &state, const NoiseModel &noise) {
    return apply_spam(noise, std::clamp(state.rho(0, 0).real(), 0.0, 1.0));
}

double survival_deficit(const Su2Matrix &u) { return std::norm(u(1, 0)); }

}  // namespace pdcal
