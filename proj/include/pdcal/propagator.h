#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pdcal/core_model.h"

namespace pdcal {

/// 2×2 unitary; all comparisons are modulo global phase.
using Su2Matrix = Eigen::Matrix2cd;

/// Qubit density operator, kept distinct from Su2Matrix so overloads stay unambiguous.
struct DensityMatrix {
    Eigen::Matrix2cd rho;

    static DensityMatrix ground() {
        DensityMatrix state;
        state.rho << 1.0, 0.0, 0.0, 0.0;
        return state;
    }
};

/// Control-system timing resolution; the default integrator slice.
constexpr double kDefaultStep = 1e-9;

const Eigen::Matrix2cd &pauli_x();
const Eigen::Matrix2cd &pauli_y();
const Eigen::Matrix2cd &pauli_z();

/// exp(−i·angle·(cos φ σx + sin φ σy)/2): rotation by `angle` about the equatorial axis at azimuth φ.
Su2Matrix equatorial_rotation(double azimuth, double angle);
/// exp(−i·angle·σ/2) for the named axis.
Su2Matrix rx(double angle);
Su2Matrix ry(double angle);
Su2Matrix rz(double angle);

/// |tr(U†V)|/2: 1 iff U and V agree up to global phase.
double gate_fidelity(const Su2Matrix &u, const Su2Matrix &v);
/// max |(U†U − I)_ij|.
double unitarity_error(const Su2Matrix &u);

/// Nearest matrix of the form [[a, −b*], [b, a*]] with |a|² + |b|² = 1. Long
/// products are renormalized with this to stop rounding drift.
Su2Matrix project_su2(const Su2Matrix &u);

/// Ω·g(a(t))·[cos φ σx + sin φ σy]/2 with φ = frame_phase + phase_at(chain, g(a(t))).
Eigen::Matrix2cd hamiltonian_at(const DriveChain &chain, const PulseShape &shape, double frame_phase, double t);

/// One interval of a pulse on which the Hamiltonian is sampled at the midpoint.
struct TimeSlice {
    double start;
    double width;
    bool constant;  // plateau: the Hamiltonian is exactly constant across the slice
};

/// Slices ramp-up, plateau and ramp-down separately so segment edges fall on slice
/// edges. With `merge_plateau` the plateau becomes a single exact slice.
std::vector<TimeSlice> slice_pulse(const PulseShape &shape, double step, bool merge_plateau);

/// Time-ordered product of midpoint-sampled slice exponentials.
Su2Matrix propagate_pulse(const DriveChain &chain, const PulseShape &shape, double frame_phase,
                          double step = kDefaultStep);

/// Propagates the sub-interval [t0, t1] of a pulse (used for ramp-segment unitaries).
Su2Matrix propagate_segment(const DriveChain &chain, const PulseShape &shape, double frame_phase, double t0,
                            double t1, double step = kDefaultStep);

/// Rz(θ)·U·Rz(θ)†: the pulse unitary re-expressed for frame phase θ.
Su2Matrix reframe(const Su2Matrix &u, double frame_phase);

/// Ordered product of pulses separated by identity gaps. One base pulse is propagated
/// and conjugated per frame phase.
Su2Matrix propagate_train(const DriveChain &chain, const PulseTrain &train, double step = kDefaultStep);

/// Density-matrix propagation with z-basis dephasing applied after every slice
/// (and across gaps). T₂ = ∞ reduces to unitary conjugation.
DensityMatrix propagate_density(const DriveChain &chain, const PulseTrain &train, const NoiseModel &noise,
                                double step = kDefaultStep, const DensityMatrix &initial = DensityMatrix::ground());

/// One pulse of density-matrix evolution with the same slicing and dephasing as
/// propagate_density; used for heterogeneous pulse sequences.
DensityMatrix propagate_density_pulse(const DriveChain &chain, const PulseShape &shape, double frame_phase,
                                      const NoiseModel &noise, const DensityMatrix &state, double step = kDefaultStep);

/// Observed probability of |0⟩ after evolving |0⟩ by `u`, including SPAM.
double survival_probability(const Su2Matrix &u, const NoiseModel &noise = {});
double survival_probability(const DensityMatrix &state, const NoiseModel &noise = {});

/// 1 − P₀ for |0⟩ evolved by `u`, computed as |U₁₀|² to keep small deficits accurate.
double survival_deficit(const Su2Matrix &u);

}  // namespace pdcal
