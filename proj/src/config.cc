#include "pdcal/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

#include "pdcal/error.h"

namespace pdcal {

using nlohmann::json;

Grid Grid::range(double start, double stop, int count) {
    Grid g;
    g.start = start;
    g.stop = stop;
    g.count = count;
    g.is_range = true;
    return g;
}

Grid Grid::list(std::vector<double> values) {
    Grid g;
    g.explicit_values = std::move(values);
    return g;
}

std::vector<double> Grid::values() const {
    if (!is_range) {
        return explicit_values;
    }
    std::vector<double> out(std::max(count, 0));
    for (int i = 0; i < count; i++) {
        out[i] = count == 1 ? start : start + (stop - start) * i / (count - 1);
    }
    if (count > 1) {
        out.back() = stop;
    }
    return out;
}

MeasurementOptions RunConfig::measurement() const {
    MeasurementOptions m;
    m.noise = noise;
    m.shots = experiment.shots;
    m.seed = experiment.seed;
    m.quantize_amplitude = experiment.quantize;
    m.step = experiment.step;
    m.threads = experiment.threads;
    return m;
}

RbConfig RunConfig::rb() const {
    RbConfig r;
    r.lengths = experiment.rb.lengths;
    r.randomizations = experiment.rb.randomizations;
    r.seed = experiment.seed;
    r.strategy = experiment.rb.strategy;
    r.chain = chain;
    r.pulse = pulse;
    r.noise = noise;
    r.depolarizing = experiment.rb.depolarizing;
    r.shots = experiment.shots;
    r.step = experiment.step;
    r.threads = experiment.threads;
    return r;
}

namespace {

// Walks a document, collecting every problem instead of stopping at the first.
class Reader {
  public:
    std::vector<ConfigIssue> issues;

    void issue(const std::string &key, const std::string &message) { issues.push_back({key, message}); }

    // Flags members not in `known`. Returns false when `value` is not an object.
    bool object(const json &value, const std::string &path, std::initializer_list<const char *> known) {
        if (!value.is_object()) {
            issue(path, "expected an object");
            return false;
        }
        const std::set<std::string> allowed(known.begin(), known.end());
        for (const auto &[name, member] : value.items()) {
            if (!allowed.contains(name)) {
                issue(join(path, name), "unknown key");
            }
        }
        return true;
    }

    const json *find(const json &obj, const std::string &path, const char *name, bool required = false) {
        const auto it = obj.find(name);
        if (it == obj.end()) {
            if (required) {
                issue(join(path, name), "missing required key");
            }
            return nullptr;
        }
        return &*it;
    }

    void number(const json &obj, const std::string &path, const char *name, double &out, bool required = false) {
        if (const json *v = find(obj, path, name, required)) {
            if (v->is_number()) {
                out = v->get<double>();
            } else {
                issue(join(path, name), "expected a number");
            }
        }
    }

    // A number in radians, or {"turns": x} meaning 2πx.
    bool angle_value(const json &v, const std::string &key, double &out) {
        if (v.is_number()) {
            out = v.get<double>();
            return true;
        }
        if (v.is_object() && v.size() == 1 && v.contains("turns") && v["turns"].is_number()) {
            out = turns(v["turns"].get<double>());
            return true;
        }
        issue(key, "expected an angle: a number in radians or {\"turns\": x}");
        return false;
    }

    void angle(const json &obj, const std::string &path, const char *name, double &out) {
        if (const json *v = find(obj, path, name)) {
            angle_value(*v, join(path, name), out);
        }
    }

    template <typename Int>
    void integer(const json &obj, const std::string &path, const char *name, Int &out) {
        if (const json *v = find(obj, path, name)) {
            if (v->is_number_integer()) {
                if constexpr (std::is_unsigned_v<Int>) {
                    if (v->is_number_unsigned() || v->get<long long>() >= 0) {
                        out = v->get<Int>();
                    } else {
                        issue(join(path, name), "expected a non-negative integer");
                    }
                } else {
                    out = v->get<Int>();
                }
            } else {
                issue(join(path, name), "expected an integer");
            }
        }
    }

    void boolean(const json &obj, const std::string &path, const char *name, bool &out) {
        if (const json *v = find(obj, path, name)) {
            if (v->is_boolean()) {
                out = v->get<bool>();
            } else {
                issue(join(path, name), "expected true or false");
            }
        }
    }

    void number_list(const json &obj, const std::string &path, const char *name, std::vector<double> &out,
                     bool angles) {
        const json *v = find(obj, path, name);
        if (!v) {
            return;
        }
        const std::string key = join(path, name);
        if (!v->is_array()) {
            issue(key, "expected an array");
            return;
        }
        out.clear();
        for (std::size_t i = 0; i < v->size(); i++) {
            double x = 0.0;
            const std::string item = key + "[" + std::to_string(i) + "]";
            if (angles) {
                angle_value((*v)[i], item, x);
            } else if ((*v)[i].is_number()) {
                x = (*v)[i].get<double>();
            } else {
                issue(item, "expected a number");
            }
            out.push_back(x);
        }
    }

    void grid(const json &obj, const std::string &path, const char *name, Grid &out, bool angles) {
        const json *v = find(obj, path, name);
        if (!v) {
            return;
        }
        const std::string key = join(path, name);
        if (v->is_array()) {
            std::vector<double> values;
            number_list(obj, path, name, values, angles);
            out = Grid::list(values);
        } else if (v->is_object() && !v->contains("turns")) {
            if (!object(*v, key, {"start", "stop", "count"})) {
                return;
            }
            Grid g = Grid::range(0.0, 0.0, 0);
            const json *start = find(*v, key, "start", true);
            const json *stop = find(*v, key, "stop", true);
            if (start) {
                angles ? (void)angle_value(*start, key + ".start", g.start) : number(*v, key, "start", g.start);
            }
            if (stop) {
                angles ? (void)angle_value(*stop, key + ".stop", g.stop) : number(*v, key, "stop", g.stop);
            }
            if (find(*v, key, "count", true)) {
                integer(*v, key, "count", g.count);
            }
            out = g;
        } else {
            issue(key, "expected a list of values or {\"start\", \"stop\", \"count\"}");
            return;
        }
        if (out.values().empty()) {
            issue(key, "grid is empty");
        }
    }

    static std::string join(const std::string &path, const std::string &name) {
        return path.empty() ? name : path + "." + name;
    }
};

void read_pulse(Reader &r, const json &doc, RunConfig &c) {
    const json *pulse = r.find(doc, "", "pulse", true);
    if (!pulse || !r.object(*pulse, "pulse", {"duration", "ramp", "amplitude"})) {
        return;
    }
    r.number(*pulse, "pulse", "duration", c.pulse.duration, true);
    r.number(*pulse, "pulse", "ramp", c.pulse.ramp, true);
    r.number(*pulse, "pulse", "amplitude", c.pulse.amplitude);
}

void read_chain(Reader &r, const json &doc, RunConfig &c) {
    const json *chain = r.find(doc, "", "chain");
    bool has_rate = false;
    if (chain && r.object(*chain, "chain", {"native", "compensation", "nonlinearity", "rabi_rate"})) {
        std::vector<double> native, compensation, nonlinearity{0.0, 1.0};
        r.number_list(*chain, "chain", "native", native, true);
        r.number_list(*chain, "chain", "compensation", compensation, true);
        r.number_list(*chain, "chain", "nonlinearity", nonlinearity, false);
        c.chain.native = PhasePolynomial(native);
        c.chain.compensation = PhasePolynomial(compensation);
        c.chain.nonlinearity.terms = Polynomial(nonlinearity);
        if (r.find(*chain, "chain", "rabi_rate")) {
            has_rate = true;
            r.number(*chain, "chain", "rabi_rate", c.chain.rabi_rate);
        }
    }
    if (!has_rate) {
        try {
            c.chain.rabi_rate = rabi_normalization(c.pulse);
        } catch (const Error &) {
            // Reported by the pulse-shape checks.
        }
    }
}

void read_noise(Reader &r, const json &doc, RunConfig &c) {
    const json *noise = r.find(doc, "", "noise");
    if (!noise || !r.object(*noise, "noise", {"T2", "spam"})) {
        return;
    }
    if (const json *t2 = r.find(*noise, "noise", "T2")) {
        if (t2->is_null()) {
            c.noise.t2 = std::numeric_limits<double>::infinity();
        } else {
            r.number(*noise, "noise", "T2", c.noise.t2);
        }
    }
    r.number(*noise, "noise", "spam", c.noise.spam);
}

LinearScanOptions read_range(Reader &r, const json &obj, const std::string &path, LinearScanOptions scan) {
    r.angle(obj, path, "lo", scan.lo);
    r.angle(obj, path, "hi", scan.hi);
    r.integer(obj, path, "grid", scan.grid);
    r.integer(obj, path, "refine_half_window", scan.refine_half_window);
    return scan;
}

void read_calibration(Reader &r, const json &exp, RunConfig &c) {
    const std::string path = "experiment.calibration";
    const json *cal = r.find(exp, "experiment", "calibration");
    if (!cal || !r.object(*cal, path,
                          {"lo", "hi", "grid", "refine_half_window", "amplitude", "orders", "budget", "ranges",
                           "trains"})) {
        return;
    }
    CalibrationSettings &s = c.experiment.calibration;
    s.scan = read_range(r, *cal, path, s.scan);
    r.number(*cal, path, "amplitude", s.amplitude);
    r.integer(*cal, path, "orders", s.orders);
    r.integer(*cal, path, "budget", s.budget);
    if (const json *ranges = r.find(*cal, path, "ranges")) {
        if (!ranges->is_array()) {
            r.issue(path + ".ranges", "expected an array");
        } else {
            s.ranges.clear();
            for (std::size_t i = 0; i < ranges->size(); i++) {
                const std::string item = path + ".ranges[" + std::to_string(i) + "]";
                if (r.object((*ranges)[i], item, {"lo", "hi", "grid", "refine_half_window"})) {
                    s.ranges.push_back(read_range(r, (*ranges)[i], item, s.scan));
                }
            }
        }
    }
    if (const json *trains = r.find(*cal, path, "trains")) {
        if (!trains->is_array()) {
            r.issue(path + ".trains", "expected an array");
        } else {
            s.trains.clear();
            for (std::size_t i = 0; i < trains->size(); i++) {
                const std::string item = path + ".trains[" + std::to_string(i) + "]";
                PulseShape shape = c.pulse;
                if (r.object((*trains)[i], item, {"duration", "amplitude"})) {
                    r.number((*trains)[i], item, "duration", shape.duration, true);
                    r.number((*trains)[i], item, "amplitude", shape.amplitude, true);
                    s.trains.push_back(shape);
                }
            }
        }
    }
}

void read_probe(Reader &r, const json &obj, const std::string &path, const char *name, ProbePulse &probe) {
    const json *p = r.find(obj, path, name);
    const std::string key = Reader::join(path, name);
    if (!p || !r.object(*p, key, {"duration", "ramp", "amplitude"})) {
        return;
    }
    r.number(*p, key, "duration", probe.duration);
    r.number(*p, key, "ramp", probe.ramp);
    r.number(*p, key, "amplitude", probe.amplitude);
}

void read_sandwich(Reader &r, const json &exp, RunConfig &c) {
    const std::string path = "experiment.sandwich";
    const json *sw = r.find(exp, "experiment", "sandwich");
    if (!sw || !r.object(*sw, path, {"blocks", "pi", "half"})) {
        return;
    }
    r.integer(*sw, path, "blocks", c.experiment.sandwich.blocks);
    read_probe(r, *sw, path, "pi", c.experiment.sandwich.pi);
    read_probe(r, *sw, path, "half", c.experiment.sandwich.half);
}

void read_rb(Reader &r, const json &exp, RunConfig &c) {
    const std::string path = "experiment.rb";
    const json *rb = r.find(exp, "experiment", "rb");
    if (!rb || !r.object(*rb, path,
                         {"lengths", "randomizations", "strategy", "depolarizing", "fixed_offset", "bootstrap"})) {
        return;
    }
    RbSettings &s = c.experiment.rb;
    if (const json *lengths = r.find(*rb, path, "lengths")) {
        if (lengths->is_array()) {
            s.lengths.clear();
            for (std::size_t i = 0; i < lengths->size(); i++) {
                if ((*lengths)[i].is_number_integer()) {
                    s.lengths.push_back((*lengths)[i].get<int>());
                } else {
                    r.issue(path + ".lengths[" + std::to_string(i) + "]", "expected an integer");
                }
            }
        } else if (lengths->is_object()) {
            const std::string key = path + ".lengths";
            int longest = 1;
            double ratio = 2.0;
            if (r.object(*lengths, key, {"longest", "ratio"})) {
                if (r.find(*lengths, key, "longest", true)) {
                    r.integer(*lengths, key, "longest", longest);
                }
                r.number(*lengths, key, "ratio", ratio);
                try {
                    s.lengths = geometric_lengths(longest, ratio);
                } catch (const Error &e) {
                    r.issue(key, e.what());
                }
            }
        } else {
            r.issue(path + ".lengths", "expected a list of lengths or {\"longest\", \"ratio\"}");
        }
    }
    r.integer(*rb, path, "randomizations", s.randomizations);
    if (const json *strategy = r.find(*rb, path, "strategy")) {
        try {
            s.strategy = parse_strategy(strategy->is_string() ? strategy->get<std::string>() : std::string());
        } catch (const Error &e) {
            r.issue("RbConfig.strategy", e.what());
        }
    }
    r.number(*rb, path, "depolarizing", s.depolarizing);
    if (const json *offset = r.find(*rb, path, "fixed_offset")) {
        if (offset->is_null()) {
            s.fixed_offset.reset();
        } else if (offset->is_number()) {
            s.fixed_offset = offset->get<double>();
        } else {
            r.issue(path + ".fixed_offset", "expected a number or null");
        }
    }
    r.integer(*rb, path, "bootstrap", s.bootstrap);
}

void read_experiment(Reader &r, const json &doc, RunConfig &c) {
    const json *exp = r.find(doc, "", "experiment");
    if (!exp || !r.object(*exp, "experiment",
                          {"pulses", "amplitudes", "phi_c_prime", "shots", "seed", "step", "threads", "quantize",
                           "calibration", "sandwich", "rb"})) {
        return;
    }
    ExperimentSettings &e = c.experiment;
    r.integer(*exp, "experiment", "pulses", e.pulses);
    r.grid(*exp, "experiment", "amplitudes", e.amplitudes, false);
    r.grid(*exp, "experiment", "phi_c_prime", e.phi_c_prime, true);
    r.integer(*exp, "experiment", "shots", e.shots);
    r.integer(*exp, "experiment", "seed", e.seed);
    r.number(*exp, "experiment", "step", e.step);
    r.integer(*exp, "experiment", "threads", e.threads);
    r.boolean(*exp, "experiment", "quantize", e.quantize);
    read_calibration(r, *exp, c);
    read_sandwich(r, *exp, c);
    read_rb(r, *exp, c);
}

template <typename Fn>
void check(Reader &r, Fn &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        r.issue(e.key().empty() ? std::string(to_string(e.kind())) : e.key(), e.what());
    }
}

void check_invariants(Reader &r, const RunConfig &c) {
    check(r, [&] { validate(c.pulse); });
    check(r, [&] { validate(c.noise); });
    double a_max = 1.5;
    for (double a : c.experiment.amplitudes.values()) {
        a_max = std::max(a_max, std::abs(a));
    }
    check(r, [&] { validate(c.chain, a_max); });
    const ExperimentSettings &e = c.experiment;
    if (e.pulses < 1) {
        r.issue("experiment.pulses", "pulse count must be at least 1");
    }
    if (e.shots < 0) {
        r.issue("experiment.shots", "shot count must be non-negative");
    }
    if (!(e.step > 0.0) || !std::isfinite(e.step)) {
        r.issue("experiment.step", "integration step must be positive");
    }
    if (e.amplitudes.is_range && e.amplitudes.count < 1) {
        r.issue("experiment.amplitudes.count", "grid count must be at least 1");
    }
    if (e.phi_c_prime.is_range && e.phi_c_prime.count < 1) {
        r.issue("experiment.phi_c_prime.count", "grid count must be at least 1");
    }
    const CalibrationSettings &cal = e.calibration;
    auto check_scan = [&](const LinearScanOptions &s, const std::string &path) {
        if (s.grid < 3) {
            r.issue(path + ".grid", "calibration grid needs at least 3 points");
        }
        if (!(s.hi > s.lo)) {
            r.issue(path + ".hi", "calibration range is empty");
        }
        if (s.refine_half_window < 1) {
            r.issue(path + ".refine_half_window", "refinement window must be at least 1");
        }
    };
    check_scan(cal.scan, "experiment.calibration");
    for (std::size_t i = 0; i < cal.ranges.size(); i++) {
        check_scan(cal.ranges[i], "experiment.calibration.ranges[" + std::to_string(i) + "]");
    }
    if (cal.orders < 1 || cal.orders > 3) {
        r.issue("experiment.calibration.orders", "compensation orders must be 1, 2 or 3");
    }
    if (cal.budget < cal.scan.grid) {
        r.issue("experiment.calibration.budget", "evaluation budget is smaller than one grid scan");
    }
    for (std::size_t i = 0; i < cal.trains.size(); i++) {
        check(r, [&] { validate(cal.trains[i]); });
    }
    if (e.sandwich.blocks < 1) {
        r.issue("experiment.sandwich.blocks", "block count must be at least 1");
    }
    for (const ProbePulse *p : {&e.sandwich.pi, &e.sandwich.half}) {
        check(r, [&] { (void)PulseShape::make(p->duration, p->ramp, p->amplitude); });
    }
    check(r, [&] { validate(c.rb()); });
    if (e.rb.fixed_offset && !(*e.rb.fixed_offset >= 0.0 && *e.rb.fixed_offset <= 1.0)) {
        r.issue("RbConfig.fixed_offset", "fixed RB offset must lie in [0, 1]");
    }
    if (e.rb.bootstrap < 0) {
        r.issue("experiment.rb.bootstrap", "bootstrap resamples must be non-negative");
    }
}

RunConfig read(Reader &r, const json &doc) {
    RunConfig c;
    if (!r.object(doc, "", {"pulse", "chain", "noise", "experiment"})) {
        r.issues.back().key = "config";
        return c;
    }
    read_pulse(r, doc, c);
    read_chain(r, doc, c);
    read_noise(r, doc, c);
    read_experiment(r, doc, c);
    if (r.issues.empty()) {
        check_invariants(r, c);
    }
    return c;
}

json grid_json(const Grid &g) {
    if (g.is_range) {
        return {{"start", g.start}, {"stop", g.stop}, {"count", g.count}};
    }
    return g.explicit_values;
}

json range_json(const LinearScanOptions &s) {
    return {{"lo", s.lo}, {"hi", s.hi}, {"grid", s.grid}, {"refine_half_window", s.refine_half_window}};
}

json probe_json(const ProbePulse &p) {
    return {{"duration", p.duration}, {"ramp", p.ramp}, {"amplitude", p.amplitude}};
}

}  // namespace

std::vector<ConfigIssue> validate_config(const json &document) {
    Reader r;
    read(r, document);
    return r.issues;
}

RunConfig parse_config(const json &document) {
    Reader r;
    RunConfig c = read(r, document);
    if (!r.issues.empty()) {
        throw Error(ErrorKind::Config, r.issues.front().message, r.issues.front().key);
    }
    return c;
}

RunConfig load_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Config, "cannot open config file '" + path + "'", "config");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what(), "config");
    }
    return parse_config(doc);
}

json to_json(const RunConfig &c) {
    json out;
    out["pulse"] = {{"duration", c.pulse.duration}, {"ramp", c.pulse.ramp}, {"amplitude", c.pulse.amplitude}};
    out["chain"] = {{"native", c.chain.native.terms.coefficients()},
                    {"compensation", c.chain.compensation.terms.coefficients()},
                    {"nonlinearity", c.chain.nonlinearity.terms.coefficients()},
                    {"rabi_rate", c.chain.rabi_rate}};
    out["noise"] = {{"T2", c.noise.dephasing() ? json(c.noise.t2) : json(nullptr)}, {"spam", c.noise.spam}};

    const ExperimentSettings &e = c.experiment;
    json cal = range_json(e.calibration.scan);
    cal["amplitude"] = e.calibration.amplitude;
    cal["orders"] = e.calibration.orders;
    cal["budget"] = e.calibration.budget;
    cal["ranges"] = json::array();
    for (const auto &s : e.calibration.ranges) {
        cal["ranges"].push_back(range_json(s));
    }
    cal["trains"] = json::array();
    for (const auto &t : e.calibration.trains) {
        cal["trains"].push_back({{"duration", t.duration}, {"amplitude", t.amplitude}});
    }
    json rb = {{"lengths", e.rb.lengths},
               {"randomizations", e.rb.randomizations},
               {"strategy", std::string(to_string(e.rb.strategy))},
               {"depolarizing", e.rb.depolarizing},
               {"fixed_offset", e.rb.fixed_offset ? json(*e.rb.fixed_offset) : json(nullptr)},
               {"bootstrap", e.rb.bootstrap}};
    out["experiment"] = {
        {"pulses", e.pulses},
        {"amplitudes", grid_json(e.amplitudes)},
        {"phi_c_prime", grid_json(e.phi_c_prime)},
        {"shots", e.shots},
        {"seed", e.seed},
        {"step", e.step},
        {"threads", e.threads},
        {"quantize", e.quantize},
        {"calibration", cal},
        {"sandwich",
         {{"blocks", e.sandwich.blocks}, {"pi", probe_json(e.sandwich.pi)}, {"half", probe_json(e.sandwich.half)}}},
        {"rb", rb},
    };
    return out;
}

}  // namespace pdcal
