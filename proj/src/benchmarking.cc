#include "pdcal/benchmarking.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "pdcal/error.h"
#include "pdcal/experiments.h"
#include "pdcal/parallel.h"
#include "pdcal/rng.h"

namespace pdcal {

namespace {

constexpr double kQuarter = 0.5 * kPi;

int quarter_turns(double angle) {
    const long q = std::lround(angle / kQuarter);
    if (std::abs(angle - q * kQuarter) > 1e-12) {
        throw Error(ErrorKind::Domain, "Clifford compilation needs multiples of pi/2");
    }
    return static_cast<int>(((q % 4) + 4) % 4);
}

int strategy_index(DecompositionStrategy s) { return static_cast<int>(s); }

// Pulse kinds used by the cache: π/2, π, and π of doubled duration.
enum PulseKind { kHalf = 0, kPiKind = 1, kLongPi = 2 };

PulseKind kind_of(const GateOp &op, DecompositionStrategy strategy) {
    if (std::abs(op.angle - kQuarter) < 1e-12) {
        return kHalf;
    }
    if (std::abs(op.angle - kPi) < 1e-12) {
        return strategy == DecompositionStrategy::DoubleDurationPi ? kLongPi : kPiKind;
    }
    throw Error(ErrorKind::Domain, "pulse area must be pi or pi/2");
}

const PulseShape &shape_of(const PulseCalibration &pulses, PulseKind kind) {
    switch (kind) {
        case kHalf:
            return pulses.half;
        case kPiKind:
            return pulses.pi;
        default:
            return pulses.long_pi;
    }
}

// Physical op stream of one Clifford entered with frame `q` (quarter turns).
struct CompiledClifford {
    std::vector<std::pair<PulseKind, int>> pulses;  // (kind, physical quarter phase)
    int frame_out = 0;
};

CompiledClifford compile_clifford(int index, DecompositionStrategy strategy, int frame_in) {
    CompiledClifford out;
    int q = frame_in;
    for (const GateOp &op : decompose_clifford(index, strategy)) {
        if (op.virtual_z) {
            q = (q + quarter_turns(op.angle)) % 4;
        } else {
            const int physical = ((quarter_turns(op.phase) - q) % 4 + 4) % 4;
            out.pulses.emplace_back(kind_of(op, strategy), physical);
        }
    }
    out.frame_out = q;
    return out;
}

using Ptm = Eigen::Matrix4d;

Ptm pulse_ptm(const DriveChain &chain, const PulseShape &shape, double phase, const NoiseModel &noise,
              double step) {
    const std::array<const Eigen::Matrix2cd *, 3> sigma{&pauli_x(), &pauli_y(), &pauli_z()};
    auto basis = [&](int j) -> Eigen::Matrix2cd {
        return j == 0 ? Eigen::Matrix2cd::Identity().eval() : *sigma[j - 1];
    };
    Ptm r;
    for (int j = 0; j < 4; j++) {
        const DensityMatrix image = propagate_density_pulse(chain, shape, phase, noise, {basis(j)}, step);
        for (int i = 0; i < 4; i++) {
            r(i, j) = 0.5 * (basis(i) * image.rho).trace().real();
        }
    }
    return r;
}

double ptm_survival(const Ptm &total) {
    const Eigen::Vector4d v = total * Eigen::Vector4d(1.0, 0.0, 0.0, 1.0);
    return 0.5 * (v(0) + v(3));
}

// Per-configuration cache: physical unitary (or PTM) of every (Clifford, entry frame).
class RbCache {
  public:
    explicit RbCache(const RbConfig &config) : strategy_(config.strategy), dephasing_(config.noise.dephasing()) {
        const PulseCalibration pulses = calibrate_pulses(config.chain, config.pulse);
        std::array<std::array<Su2Matrix, 4>, 3> unitary;
        std::array<std::array<Ptm, 4>, 3> ptm;
        for (int k = 0; k < 3; k++) {
            const PulseShape &shape = shape_of(pulses, static_cast<PulseKind>(k));
            if (dephasing_) {
                for (int q = 0; q < 4; q++) {
                    ptm[k][q] = pulse_ptm(config.chain, shape, q * kQuarter, config.noise, config.step);
                }
            } else {
                const Su2Matrix base = propagate_pulse(config.chain, shape, 0.0, config.step);
                for (int q = 0; q < 4; q++) {
                    unitary[k][q] = reframe(base, q * kQuarter);
                }
            }
        }
        for (int c = 0; c < kCliffordCount; c++) {
            for (int q = 0; q < 4; q++) {
                const CompiledClifford compiled = compile_clifford(c, strategy_, q);
                Entry &e = table_[c][q];
                e.frame_out = compiled.frame_out;
                e.unitary = Su2Matrix::Identity();
                e.ptm = Ptm::Identity();
                for (auto [kind, phase] : compiled.pulses) {
                    if (dephasing_) {
                        e.ptm = ptm[kind][phase] * e.ptm;
                    } else {
                        e.unitary = unitary[kind][phase] * e.unitary;
                    }
                }
            }
        }
    }

    double survival(const RbSequence &sequence) const {
        int q = 0;
        Su2Matrix u = Su2Matrix::Identity();
        Ptm r = Ptm::Identity();
        auto apply = [&](int c) {
            const Entry &e = table_[c][q];
            if (dephasing_) {
                r = e.ptm * r;
            } else {
                u = project_su2(e.unitary * u);
            }
            q = e.frame_out;
        };
        for (int c : sequence.cliffords) {
            apply(c);
        }
        apply(sequence.recovery);
        return dephasing_ ? ptm_survival(r) : survival_probability(u);
    }

  private:
    struct Entry {
        Su2Matrix unitary;
        Ptm ptm;
        int frame_out = 0;
    };
    DecompositionStrategy strategy_;
    bool dephasing_;
    std::array<std::array<Entry, 4>, kCliffordCount> table_;
};

double direct_survival(const RbConfig &config, const RbSequence &sequence) {
    const PulseCalibration pulses = calibrate_pulses(config.chain, config.pulse);
    const std::vector<PhysicalPulse> compiled = compile_sequence(sequence, config.strategy, pulses);
    if (config.noise.dephasing()) {
        DensityMatrix state = DensityMatrix::ground();
        for (const PhysicalPulse &p : compiled) {
            const PulseShape shape = PulseShape::make(p.duration, config.pulse.ramp, p.amplitude);
            state = propagate_density_pulse(config.chain, shape, p.phase, config.noise, state, config.step);
        }
        return state.rho(0, 0).real();
    }
    Su2Matrix u = Su2Matrix::Identity();
    for (const PhysicalPulse &p : compiled) {
        const PulseShape shape = PulseShape::make(p.duration, config.pulse.ramp, p.amplitude);
        u = project_su2(propagate_pulse(config.chain, shape, p.phase, config.step) * u);
    }
    return survival_probability(u);
}

double observe(const RbConfig &config, double ideal, int clifford_count, std::uint64_t key) {
    double p = ideal;
    if (config.depolarizing > 0.0) {
        p = 0.5 + 0.5 * std::pow(1.0 - config.depolarizing, clifford_count) * (2.0 * p - 1.0);
    }
    p = apply_spam(config.noise, p);
    return sample_shots(p, config.shots, key);
}

}  // namespace

DecompositionStrategy parse_strategy(std::string_view name) {
    if (name == "PiAndPiHalf") {
        return DecompositionStrategy::PiAndPiHalf;
    }
    if (name == "PiHalfOnly") {
        return DecompositionStrategy::PiHalfOnly;
    }
    if (name == "DoubleDurationPi") {
        return DecompositionStrategy::DoubleDurationPi;
    }
    throw Error(ErrorKind::Config, "unknown decomposition strategy '" + std::string(name) + "'",
                "RbConfig.strategy");
}

std::string_view to_string(DecompositionStrategy strategy) {
    switch (strategy) {
        case DecompositionStrategy::PiAndPiHalf:
            return "PiAndPiHalf";
        case DecompositionStrategy::PiHalfOnly:
            return "PiHalfOnly";
        case DecompositionStrategy::DoubleDurationPi:
            return "DoubleDurationPi";
    }
    return "?";
}

Su2Matrix compose_ops(const std::vector<GateOp> &ops) {
    Su2Matrix u = Su2Matrix::Identity();
    for (const GateOp &op : ops) {
        u = (op.virtual_z ? rz(op.angle) : equatorial_rotation(op.phase, op.angle)) * u;
    }
    return u;
}

int physical_pulse_count(const std::vector<GateOp> &ops) {
    return static_cast<int>(std::count_if(ops.begin(), ops.end(), [](const GateOp &op) { return !op.virtual_z; }));
}

CliffordGroup::CliffordGroup() {
    // Breadth-first closure under π/2 rotations about x and y.
    const std::array<Su2Matrix, 2> generators{rx(kQuarter), ry(kQuarter)};
    std::deque<Su2Matrix> frontier{Su2Matrix::Identity()};
    elements_.push_back({0, Su2Matrix::Identity(), {}});
    while (!frontier.empty()) {
        const Su2Matrix u = frontier.front();
        frontier.pop_front();
        for (const Su2Matrix &g : generators) {
            const Su2Matrix v = g * u;
            if (find(v) < 0) {
                elements_.push_back({static_cast<int>(elements_.size()), v, {}});
                frontier.push_back(v);
            }
        }
    }
    if (elements_.size() != kCliffordCount) {
        throw Error(ErrorKind::Analysis, "Clifford closure did not produce 24 elements");
    }
    for (int a = 0; a < kCliffordCount; a++) {
        for (int b = 0; b < kCliffordCount; b++) {
            product_[a][b] = find(elements_[a].unitary * elements_[b].unitary);
        }
    }
    for (int a = 0; a < kCliffordCount; a++) {
        inverse_[a] = find(elements_[a].unitary.adjoint());
    }

    // PiAndPiHalf: a frame update alone, else one pulse followed by a frame update.
    std::vector<std::vector<GateOp>> candidates;
    for (int z = 0; z < 4; z++) {
        candidates.push_back(z == 0 ? std::vector<GateOp>{} : std::vector<GateOp>{GateOp::z(z * kQuarter)});
    }
    for (double area : {kQuarter, kPi}) {
        for (int phase = 0; phase < 4; phase++) {
            for (int z = 0; z < 4; z++) {
                std::vector<GateOp> ops{GateOp::pulse(area, phase * kQuarter)};
                if (z != 0) {
                    ops.push_back(GateOp::z(z * kQuarter));
                }
                candidates.push_back(std::move(ops));
            }
        }
    }
    std::array<bool, kCliffordCount> found{};
    for (const auto &ops : candidates) {
        const int c = find(compose_ops(ops));
        if (c >= 0 && !found[c]) {
            found[c] = true;
            elements_[c].decompositions[strategy_index(DecompositionStrategy::PiAndPiHalf)] = ops;
            elements_[c].decompositions[strategy_index(DecompositionStrategy::DoubleDurationPi)] = ops;
        }
    }

    // PiHalfOnly: shortest words in ±X/2, ±Y/2, no frame updates.
    std::array<bool, kCliffordCount> reached{};
    reached[0] = true;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        const int c = queue.front();
        queue.pop_front();
        for (int phase = 0; phase < 4; phase++) {
            std::vector<GateOp> ops = elements_[c].decompositions[strategy_index(DecompositionStrategy::PiHalfOnly)];
            ops.push_back(GateOp::pulse(kQuarter, phase * kQuarter));
            const int next = find(compose_ops(ops));
            if (!reached[next]) {
                reached[next] = true;
                elements_[next].decompositions[strategy_index(DecompositionStrategy::PiHalfOnly)] = std::move(ops);
                queue.push_back(next);
            }
        }
    }
    for (int c = 0; c < kCliffordCount; c++) {
        if (!found[c] || !reached[c]) {
            throw Error(ErrorKind::Analysis, "Clifford decomposition search is incomplete");
        }
    }
}

int CliffordGroup::find(const Su2Matrix &u, double tolerance) const {
    for (const CliffordElement &e : elements_) {
        if (gate_fidelity(e.unitary, u) > 1.0 - tolerance) {
            return e.index;
        }
    }
    return -1;
}

const CliffordGroup &clifford_table() {
    static const CliffordGroup group;
    return group;
}

const std::vector<GateOp> &decompose_clifford(int index, DecompositionStrategy strategy) {
    if (index < 0 || index >= kCliffordCount) {
        throw Error(ErrorKind::Domain, "Clifford index out of range");
    }
    return clifford_table()[index].decompositions[strategy_index(strategy)];
}

double mean_pulse_count(DecompositionStrategy strategy) {
    int total = 0;
    for (int c = 0; c < kCliffordCount; c++) {
        total += physical_pulse_count(decompose_clifford(c, strategy));
    }
    return static_cast<double>(total) / kCliffordCount;
}

RbSequence generate_rb_sequence(int length, std::uint64_t seed) {
    if (length < 0) {
        throw Error(ErrorKind::Domain, "sequence length must be non-negative");
    }
    const CliffordGroup &group = clifford_table();
    CounterRng rng(seed);
    RbSequence seq;
    seq.cliffords.resize(length);
    int net = 0;
    for (int &c : seq.cliffords) {
        c = static_cast<int>(rng.below(kCliffordCount));
        net = group.multiply(c, net);
    }
    seq.recovery = group.inverse(net);
    return seq;
}

PulseCalibration calibrate_pulses(const DriveChain &chain, const PulseShape &base) {
    validate(base);
    auto trimmed = [&](double duration, double area) {
        const double nominal = area / (chain.rabi_rate * (duration - base.ramp));
        const ProbePulse probe{duration, base.ramp, nominal};
        return PulseShape::make(duration, base.ramp, trim_amplitude(chain, probe, area));
    };
    PulseCalibration out;
    out.half = trimmed(base.duration, kQuarter);
    out.pi = trimmed(base.duration, kPi);
    out.long_pi = trimmed(2.0 * base.duration, kPi);
    return out;
}

std::vector<PhysicalPulse> compile_sequence(const RbSequence &sequence, DecompositionStrategy strategy,
                                            const PulseCalibration &pulses) {
    std::vector<PhysicalPulse> out;
    int q = 0;
    auto append = [&](int c) {
        const CompiledClifford compiled = compile_clifford(c, strategy, q);
        for (auto [kind, phase] : compiled.pulses) {
            const PulseShape &shape = shape_of(pulses, kind);
            out.push_back({kind == kHalf ? kQuarter : kPi, phase * kQuarter, shape.amplitude, shape.duration});
        }
        q = compiled.frame_out;
    };
    for (int c : sequence.cliffords) {
        append(c);
    }
    append(sequence.recovery);
    return out;
}

std::vector<int> geometric_lengths(int longest, double ratio) {
    if (longest < 1 || !(ratio > 1.0)) {
        throw Error(ErrorKind::Config, "length ladder needs longest >= 1 and ratio > 1", "RbConfig.lengths");
    }
    std::vector<int> out{1};
    while (out.back() < longest) {
        const double next = std::max(out.back() + 1.0, std::round(out.back() * ratio));
        out.push_back(static_cast<int>(std::min<double>(next, longest)));
    }
    return out;
}

void validate(const RbConfig &config) {
    if (config.lengths.empty()) {
        throw Error(ErrorKind::Config, "RB needs at least one sequence length", "RbConfig.lengths");
    }
    for (std::size_t i = 0; i < config.lengths.size(); i++) {
        if (config.lengths[i] < 1 || (i > 0 && config.lengths[i] <= config.lengths[i - 1])) {
            throw Error(ErrorKind::Config, "sequence lengths must be >= 1 and strictly increasing",
                        "RbConfig.lengths");
        }
    }
    if (config.randomizations < 2) {
        throw Error(ErrorKind::Config, "RB needs at least 2 randomizations", "RbConfig.randomizations");
    }
    if (!(config.depolarizing >= 0.0 && config.depolarizing <= 1.0)) {
        throw Error(ErrorKind::Config, "depolarizing strength must lie in [0, 1]", "RbConfig.depolarizing");
    }
    if (config.shots < 0) {
        throw Error(ErrorKind::Config, "shot count must be non-negative", "RbConfig.shots");
    }
    validate(config.pulse);
    validate(config.noise);
}

double sequence_survival(const RbConfig &config, const RbSequence &sequence) {
    if (config.use_cache) {
        return RbCache(config).survival(sequence);
    }
    return direct_survival(config, sequence);
}

RbTable simulate_rb(const RbConfig &config) {
    validate(config);
    RbTable table;
    table.lengths = config.lengths;
    const std::size_t n_len = config.lengths.size();
    const auto n_rand = static_cast<std::size_t>(config.randomizations);
    table.survival.assign(n_len, std::vector<double>(n_rand, 0.0));
    table.mean.assign(n_len, 0.0);

    std::optional<RbCache> cache;
    if (config.use_cache) {
        cache.emplace(config);
    }
    parallel_for(n_len * n_rand, config.threads, [&](std::size_t flat) {
        const std::size_t li = flat / n_rand;
        const std::size_t ri = flat % n_rand;
        const std::uint64_t key = derive_seed(config.seed, li, ri);
        const RbSequence seq = generate_rb_sequence(config.lengths[li], key);
        const double ideal = cache ? cache->survival(seq) : direct_survival(config, seq);
        table.survival[li][ri] = observe(config, ideal, config.lengths[li] + 1, mix64(key));
    });
    for (std::size_t li = 0; li < n_len; li++) {
        double sum = 0.0;
        for (double s : table.survival[li]) {
            sum += s;
        }
        table.mean[li] = sum / static_cast<double>(n_rand);
    }
    return table;
}

namespace {

struct DecayModel {
    double a = 0.0;
    double p = 1.0;
    double b = 0.0;
    bool b_clamped = false;
    double rss = 0.0;
};

// Best (A, B) for fixed p, with B held in [0, 1].
DecayModel solve_linear(const std::vector<double> &m, const std::vector<double> &y, double p,
                        const std::optional<double> &fixed) {
    const std::size_t n = m.size();
    double s_f = 0, s_ff = 0, s_y = 0, s_fy = 0;
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; i++) {
        f[i] = std::pow(p, m[i]);
        s_f += f[i];
        s_ff += f[i] * f[i];
        s_y += y[i];
        s_fy += f[i] * y[i];
    }
    DecayModel d;
    d.p = p;
    const double det = n * s_ff - s_f * s_f;
    if (det > 1e-300 * (n * s_ff)) {
        d.a = (n * s_fy - s_f * s_y) / det;
        d.b = (s_y - d.a * s_f) / n;
    } else {
        d.a = 0.0;
        d.b = s_y / n;
    }
    if (fixed || d.b < 0.0 || d.b > 1.0) {
        d.b = fixed ? *fixed : std::clamp(d.b, 0.0, 1.0);
        d.b_clamped = true;
        d.a = s_ff > 0.0 ? (s_fy - d.b * s_f) / s_ff : 0.0;
    }
    for (std::size_t i = 0; i < n; i++) {
        const double r = y[i] - d.a * f[i] - d.b;
        d.rss += r * r;
    }
    return d;
}

// Gauss-Newton polish of (A, p[, B]) from a good start; B stays fixed when clamped.
DecayModel polish(const std::vector<double> &m, const std::vector<double> &y, DecayModel d) {
    const std::size_t n = m.size();
    const int dof = d.b_clamped ? 2 : 3;
    double lambda = 1e-6;
    for (int iter = 0; iter < 100; iter++) {
        Eigen::MatrixXd j(n, dof);
        Eigen::VectorXd r(n);
        for (std::size_t i = 0; i < n; i++) {
            const double f = std::pow(d.p, m[i]);
            j(i, 0) = f;
            j(i, 1) = m[i] == 0.0 ? 0.0 : d.a * m[i] * std::pow(d.p, m[i] - 1.0);
            if (dof == 3) {
                j(i, 2) = 1.0;
            }
            r(i) = y[i] - d.a * f - d.b;
        }
        Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd jtr = j.transpose() * r;
        bool improved = false;
        for (int attempt = 0; attempt < 20; attempt++) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() *= 1.0 + lambda;
            const Eigen::VectorXd delta = damped.ldlt().solve(jtr);
            DecayModel trial = d;
            trial.a += delta(0);
            trial.p = std::min(1.0, d.p + delta(1));
            if (dof == 3) {
                trial.b = std::clamp(d.b + delta(2), 0.0, 1.0);
            }
            trial.rss = 0.0;
            for (std::size_t i = 0; i < n; i++) {
                const double e = y[i] - trial.a * std::pow(trial.p, m[i]) - trial.b;
                trial.rss += e * e;
            }
            if (trial.rss < d.rss) {
                d = trial;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved || d.rss == 0.0) {
            break;
        }
    }
    return d;
}

}  // namespace

RbFit fit_rb_decay(const std::vector<int> &lengths, const std::vector<double> &survival,
                   const RbFitOptions &options) {
    if (lengths.size() != survival.size()) {
        throw Error(ErrorKind::Analysis, "length and survival tables differ in size");
    }
    std::vector<double> m(lengths.begin(), lengths.end());
    std::vector<double> sorted = m;
    std::sort(sorted.begin(), sorted.end());
    if (options.fixed_offset && !(*options.fixed_offset >= 0.0 && *options.fixed_offset <= 1.0)) {
        throw Error(ErrorKind::Config, "fixed RB offset must lie in [0, 1]", "RbConfig.fixed_offset");
    }
    if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 3) {
        throw Error(ErrorKind::Analysis, "decay fit needs at least 3 distinct lengths");
    }
    const double m_min = std::max(1.0, sorted.front());
    const double m_max = sorted.back();

    // Variable projection over k = −ln p on a log grid, then golden section.
    auto profile = [&](double k) { return solve_linear(m, survival, std::exp(-k), options.fixed_offset); };
    DecayModel best = profile(0.0);
    double best_k = 0.0;
    constexpr int kGrid = 400;
    const double k_lo = 1e-12 / m_max;
    const double k_hi = 30.0 / m_min;
    std::vector<double> ks(kGrid);
    for (int i = 0; i < kGrid; i++) {
        ks[i] = k_lo * std::pow(k_hi / k_lo, static_cast<double>(i) / (kGrid - 1));
    }
    int best_i = -1;
    for (int i = 0; i < kGrid; i++) {
        const DecayModel d = profile(ks[i]);
        if (d.rss < best.rss) {
            best = d;
            best_k = ks[i];
            best_i = i;
        }
    }
    if (best_i >= 0) {
        double lo = std::log(best_i > 0 ? ks[best_i - 1] : ks[0] * 0.5);
        double hi = std::log(best_i + 1 < kGrid ? ks[best_i + 1] : ks[kGrid - 1] * 2.0);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = profile(std::exp(x1)).rss, f2 = profile(std::exp(x2)).rss;
        for (int iter = 0; iter < 100; iter++) {
            if (f1 < f2) {
                hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = profile(std::exp(x1)).rss;
            } else {
                lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = profile(std::exp(x2)).rss;
            }
        }
        const DecayModel refined = profile(std::exp(0.5 * (lo + hi)));
        if (refined.rss <= best.rss) {
            best = refined;
            best_k = std::exp(0.5 * (lo + hi));
        }
    }

    RbFit fit;
    if (best_k == 0.0) {
        // No decay resolved: p pinned to 1, the constant carries everything.
        fit.p = 1.0;
        fit.amplitude = best.a;
        fit.offset = best.b;
        fit.p_clamped = true;
        fit.offset_clamped = best.b_clamped && !options.fixed_offset;
        return fit;
    }
    best = polish(m, survival, best);
    fit.p = best.p;
    fit.amplitude = best.a;
    fit.offset = best.b;
    fit.offset_clamped = best.b_clamped && !options.fixed_offset;
    fit.p_clamped = best.p >= 1.0;
    fit.error_per_clifford = std::max(0.0, 0.5 * (1.0 - fit.p));

    const std::size_t n = m.size();
    const int dof = best.b_clamped ? 2 : 3;
    if (static_cast<int>(n) > dof) {
        Eigen::MatrixXd j(n, dof);
        for (std::size_t i = 0; i < n; i++) {
            j(i, 0) = std::pow(best.p, m[i]);
            j(i, 1) = best.a * m[i] * std::pow(best.p, m[i] - 1.0);
            if (dof == 3) {
                j(i, 2) = 1.0;
            }
        }
        const double s2 = best.rss / static_cast<double>(static_cast<int>(n) - dof);
        const Eigen::MatrixXd jtj = j.transpose() * j;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
        if (lu.isInvertible()) {
            const Eigen::MatrixXd cov = s2 * lu.inverse();
            fit.sigma_amplitude = std::sqrt(std::max(0.0, cov(0, 0)));
            fit.sigma_p = std::sqrt(std::max(0.0, cov(1, 1)));
            if (dof == 3) {
                fit.sigma_offset = std::sqrt(std::max(0.0, cov(2, 2)));
            }
            fit.sigma_error = 0.5 * fit.sigma_p;
        }
    }
    return fit;
}

RbFit fit_rb_decay(const RbTable &table, const RbFitOptions &options) {
    return fit_rb_decay(table.lengths, table.mean, options);
}

RbFit fit_rb_decay_bootstrap(const RbTable &table, int resamples, std::uint64_t seed, const RbFitOptions &options) {
    RbFit fit = fit_rb_decay(table, options);
    if (resamples <= 1) {
        return fit;
    }
    std::vector<double> errors;
    errors.reserve(resamples);
    for (int b = 0; b < resamples; b++) {
        CounterRng rng(derive_seed(seed, 0xb007, b));
        std::vector<double> mean(table.lengths.size(), 0.0);
        for (std::size_t li = 0; li < table.lengths.size(); li++) {
            const auto &row = table.survival[li];
            for (std::size_t k = 0; k < row.size(); k++) {
                mean[li] += row[rng.below(row.size())];
            }
            mean[li] /= static_cast<double>(row.size());
        }
        errors.push_back(fit_rb_decay(table.lengths, mean, options).error_per_clifford);
    }
    double mu = 0.0;
    for (double e : errors) {
        mu += e;
    }
    mu /= resamples;
    double var = 0.0;
    for (double e : errors) {
        var += (e - mu) * (e - mu);
    }
    fit.bootstrap_sigma_error = std::sqrt(var / (resamples - 1));
    return fit;
}

std::vector<RbScanPoint> rb_compensation_scan(const RbConfig &config, const std::vector<double> &slopes,
                                              int bootstrap_resamples, const RbFitOptions &options) {
    if (slopes.empty()) {
        throw Error(ErrorKind::Config, "compensation grid is empty", "experiment.phi_c_prime");
    }
    std::vector<RbScanPoint> out;
    out.reserve(slopes.size());
    for (double s : slopes) {
        RbConfig point = config;
        point.chain = config.chain.with_compensation_slope(s);
        const RbTable table = simulate_rb(point);
        out.push_back({s, fit_rb_decay_bootstrap(table, bootstrap_resamples, config.seed, options)});
    }
    return out;
}

}  // namespace pdcal
