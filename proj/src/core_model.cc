#include "pdcal/core_model.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdcal/error.h"

namespace pdcal {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Domain:
            return "domain";
        case ErrorKind::Config:
            return "config";
        case ErrorKind::DegenerateShape:
            return "degenerate_shape";
        case ErrorKind::Bracket:
            return "bracket";
        case ErrorKind::Calibration:
            return "calibration";
        case ErrorKind::Analysis:
            return "analysis";
        case ErrorKind::Symmetry:
            return "symmetry";
    }
    return "unknown";
}

namespace {

// Relative slack when comparing 2·t_ramp against T, so that the full-sin² shape
// built as (T, T/2) is accepted despite rounding.
constexpr double kShapeSlack = 1e-12;

}  // namespace

PulseShape PulseShape::make(double duration, double ramp, double amplitude) {
    PulseShape shape;
    shape.duration = duration;
    shape.ramp = ramp;
    shape.amplitude = amplitude;
    validate(shape);
    return shape;
}

PulseShape PulseShape::with_amplitude(double a) const {
    PulseShape copy = *this;
    copy.amplitude = a;
    return copy;
}

void validate(const PulseShape &shape) {
    if (!std::isfinite(shape.duration) || shape.duration <= 0) {
        throw Error(ErrorKind::Config, "pulse duration must be positive and finite", "PulseShape.duration");
    }
    if (!std::isfinite(shape.ramp) || shape.ramp <= 0 || 2.0 * shape.ramp > shape.duration * (1.0 + kShapeSlack)) {
        throw Error(ErrorKind::Config, "ramp must satisfy 0 < 2·t_ramp <= T", "PulseShape.ramp");
    }
    if (!std::isfinite(shape.amplitude) || shape.amplitude < 0) {
        throw Error(ErrorKind::Config, "amplitude must be non-negative", "PulseShape.amplitude");
    }
}

double envelope_at(const PulseShape &shape, double t) {
    const double T = shape.duration;
    if (!(t >= 0.0 && t <= T)) {
        std::ostringstream msg;
        msg << "envelope evaluated at t=" << t << " outside [0, " << T << "]";
        throw Error(ErrorKind::Domain, msg.str());
    }
    const double tr = shape.ramp;
    // Fold the down-ramp onto the up-ramp so the envelope is symmetric bit-for-bit.
    const double u = std::min(t, T - t);
    if (u >= tr) {
        return shape.amplitude;
    }
    const double s = std::sin(kPi * u / (2.0 * tr));
    return shape.amplitude * s * s;
}

double envelope_integral(const PulseShape &shape, double t) {
    const double T = shape.duration;
    const double tr = shape.ramp;
    t = std::clamp(t, 0.0, T);
    auto up = [&](double u) { return 0.5 * u - tr / (2.0 * kPi) * std::sin(kPi * u / tr); };
    const double total = T - tr;
    double value;
    if (t <= tr) {
        value = up(t);
    } else if (t <= T - tr) {
        value = 0.5 * tr + (t - tr);
    } else {
        value = total - up(T - t);
    }
    return shape.amplitude * value;
}

double rabi_normalization(const PulseShape &shape) {
    const double denom = shape.duration - shape.ramp;
    if (!(denom > 0.0)) {
        throw Error(ErrorKind::DegenerateShape, "T = t_ramp leaves no pulse area", "PulseShape.ramp");
    }
    return kTwoPi / denom;
}

Polynomial::Polynomial(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

double Polynomial::derivative(double x) const {
    double acc = 0.0;
    for (std::size_t k = coefficients_.size(); k-- > 1;) {
        acc = acc * x + static_cast<double>(k) * coefficients_[k];
    }
    return acc;
}

double Polynomial::coefficient(std::size_t order) const {
    return order < coefficients_.size() ? coefficients_[order] : 0.0;
}

void Polynomial::set_coefficient(std::size_t order, double value) {
    if (order >= coefficients_.size()) {
        coefficients_.resize(order + 1, 0.0);
    }
    coefficients_[order] = value;
}

Polynomial operator+(const Polynomial &a, const Polynomial &b) {
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t k = 0; k < out.size(); k++) {
        out[k] = a.coefficient(k) + b.coefficient(k);
    }
    return Polynomial(std::move(out));
}

double AmplitudeMap::inverse(double field, double a_max) const {
    if (field <= 0.0) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = std::max(field, 1e-3);
    while (terms(hi) < field) {
        hi *= 2.0;
        if (hi > a_max * 64.0) {
            throw Error(ErrorKind::Domain, "field amplitude outside the range of the nonlinearity map");
        }
    }
    double a = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; iter++) {
        const double f = terms(a) - field;
        if (f > 0) {
            hi = a;
        } else {
            lo = a;
        }
        const double d = terms.derivative(a);
        double next = d > 0 ? a - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - a) <= 1e-16 * std::max(1.0, std::abs(a))) {
            return next;
        }
        a = next;
    }
    return a;
}

bool AmplitudeMap::is_identity() const {
    for (std::size_t k = 0; k < terms.size(); k++) {
        if (terms.coefficient(k) != (k == 1 ? 1.0 : 0.0)) {
            return false;
        }
    }
    return terms.size() >= 2;
}

DriveChain DriveChain::ideal(const PulseShape &shape) {
    DriveChain chain;
    chain.rabi_rate = rabi_normalization(shape);
    return chain;
}

DriveChain DriveChain::with_native_slope(const PulseShape &shape, double slope) {
    DriveChain chain = ideal(shape);
    chain.native = PhasePolynomial::linear(slope);
    return chain;
}

DriveChain DriveChain::with_compensation_slope(double slope) const {
    DriveChain copy = *this;
    copy.compensation.terms.set_coefficient(1, slope);
    return copy;
}

void validate(const DriveChain &chain, double a_max) {
    if (!std::isfinite(chain.rabi_rate) || chain.rabi_rate <= 0) {
        throw Error(ErrorKind::Config, "Rabi rate must be positive", "DriveChain.rabi_rate");
    }
    for (double c : chain.native.terms.coefficients()) {
        if (!std::isfinite(c)) {
            throw Error(ErrorKind::Config, "native phase coefficients must be finite", "DriveChain.native_phase");
        }
    }
    for (double c : chain.compensation.terms.coefficients()) {
        if (!std::isfinite(c)) {
            throw Error(ErrorKind::Config, "compensation coefficients must be finite",
                        "DriveChain.compensation_phase");
        }
    }
    const auto &g = chain.nonlinearity.terms;
    if (g.coefficient(0) != 0.0) {
        throw Error(ErrorKind::Config, "amplitude map must satisfy g(0) = 0", "DriveChain.nonlinearity");
    }
    constexpr int kSamples = 1000;
    for (int k = 0; k <= kSamples; k++) {
        const double a = a_max * k / kSamples;
        if (!(g.derivative(a) > 0.0)) {
            throw Error(ErrorKind::Config, "amplitude map must be increasing on [0, a_max]",
                        "DriveChain.nonlinearity");
        }
    }
}

double phase_at(const DriveChain &chain, double a) { return chain.native(a) + chain.compensation(a); }

void validate(const NoiseModel &noise) {
    if (!(noise.t2 > 0.0)) {
        throw Error(ErrorKind::Config, "T2 must be positive", "NoiseModel.T2");
    }
    if (!(noise.spam >= 0.0 && noise.spam < 1.0)) {
        throw Error(ErrorKind::Config, "SPAM contrast loss must lie in [0, 1)", "NoiseModel.spam");
    }
}

double apply_spam(const NoiseModel &noise, double ideal) { return 0.5 * noise.spam + (1.0 - noise.spam) * ideal; }

PulseTrain PulseTrain::uniform(const PulseShape &pulse, int count, double gap) {
    PulseTrain train;
    train.pulse = pulse;
    train.count = count;
    train.gap = gap;
    train.frame_phases.assign(count > 0 ? static_cast<std::size_t>(count) : 0, 0.0);
    validate(train);
    return train;
}

void validate(const PulseTrain &train) {
    validate(train.pulse);
    if (train.count < 1) {
        throw Error(ErrorKind::Config, "pulse count must be at least 1", "PulseTrain.count");
    }
    if (!(train.gap >= 0.0) || !std::isfinite(train.gap)) {
        throw Error(ErrorKind::Config, "inter-pulse gap must be non-negative", "PulseTrain.gap");
    }
    if (train.frame_phases.size() != static_cast<std::size_t>(train.count)) {
        throw Error(ErrorKind::Config, "frame phase list length must equal the pulse count",
                    "PulseTrain.frame_phases");
    }
}

}  // namespace pdcal
