// Config-driven runner: one subcommand per experiment, CSV or JSON out.

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "pdcal/analytic.h"
#include "pdcal/benchmarking.h"
#include "pdcal/calibration.h"
#include "pdcal/config.h"
#include "pdcal/error.h"
#include "pdcal/experiments.h"

using nlohmann::json;
using namespace pdcal;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

std::string fmt(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

class CsvWriter {
  public:
    CsvWriter(const RunConfig &config, std::initializer_list<const char *> columns) {
        out_ << "# config: " << to_json(config).dump() << '\n';
        header_ = join(columns);
    }

    void comment(const std::string &tag, const json &value) { out_ << "# " << tag << ": " << value.dump() << '\n'; }

    void row(std::initializer_list<double> values) {
        if (!header_.empty()) {
            out_ << header_ << '\n';
            header_.clear();
        }
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << fmt(v);
            first = false;
        }
        out_ << '\n';
    }

    std::string str() const { return header_.empty() ? out_.str() : out_.str() + header_ + '\n'; }

  private:
    static std::string join(std::initializer_list<const char *> columns) {
        std::string s;
        for (const char *c : columns) {
            s += (s.empty() ? "" : ",") + std::string(c);
        }
        return s;
    }

    std::ostringstream out_;
    std::string header_;
};

void emit(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error(ErrorKind::Config, "cannot write output file '" + path + "'", "out");
    }
    f << text;
}

void emit_json(const std::string &path, const json &doc) { emit(path, doc.dump(2) + '\n'); }

json fit_json(const RbFit &f) {
    return {{"p", f.p},
            {"A", f.amplitude},
            {"B", f.offset},
            {"error_per_clifford", f.error_per_clifford},
            {"sigma_p", f.sigma_p},
            {"sigma_A", f.sigma_amplitude},
            {"sigma_B", f.sigma_offset},
            {"sigma_error", f.sigma_error},
            {"bootstrap_sigma_error", f.bootstrap_sigma_error},
            {"p_clamped", f.p_clamped},
            {"offset_clamped", f.offset_clamped}};
}

RbFitOptions fit_options(const RunConfig &c) {
    RbFitOptions o;
    o.fixed_offset = c.experiment.rb.fixed_offset;
    return o;
}

std::string run_scan(const RunConfig &c, int pulses) {
    const ScanResult scan =
        train_amplitude_scan(c.chain, c.pulse, pulses, c.experiment.amplitudes.values(), c.measurement());
    CsvWriter csv(c, {"A", "P0"});
    for (std::size_t i = 0; i < scan.survival.size(); i++) {
        csv.row({scan.axes[0].values[i], scan.survival[i]});
    }
    return csv.str();
}

std::string run_map(const RunConfig &c) {
    const ScanResult scan = compensation_map(c.chain, c.pulse, c.experiment.pulses, c.experiment.amplitudes.values(),
                                             c.experiment.phi_c_prime.values(), c.measurement());
    CsvWriter csv(c, {"A", "phi_c_prime", "P0"});
    const auto &a = scan.axes[0].values;
    const auto &phi = scan.axes[1].values;
    for (std::size_t i = 0; i < a.size(); i++) {
        for (std::size_t j = 0; j < phi.size(); j++) {
            csv.row({a[i], phi[j], scan.at(i, j)});
        }
    }
    return csv.str();
}

json run_sandwich(const RunConfig &c) {
    const SandwichSettings &s = c.experiment.sandwich;
    const SandwichResult r = sandwich_phase_probe(c.chain, s.pi, s.half, s.blocks, c.measurement());
    return {{"phase_difference", r.phase_difference},
            {"inferred_slope", r.inferred_slope},
            {"survival", r.survival},
            {"reference_survival", r.reference_survival},
            {"pi_amplitude", r.pi_amplitude},
            {"half_amplitude", r.half_amplitude},
            {"pi_field", r.pi_field},
            {"half_field", r.half_field},
            {"block_fidelity", r.block_fidelity},
            {"blocks", r.blocks},
            {"config", to_json(c)}};
}

json run_period(const RunConfig &c) {
    const ScanResult scan = train_amplitude_scan(c.chain, c.pulse, c.experiment.pulses,
                                                 c.experiment.amplitudes.values(), c.measurement());
    const PeriodAnalysis p = oscillation_period_analysis(scan);
    return {{"revivals", p.revivals},
            {"spacings", p.spacings},
            {"midpoints", p.midpoints},
            {"mean_spacing", p.mean_spacing},
            {"max_relative_deviation", p.max_relative_deviation},
            {"constant", p.constant},
            {"linear_coefficient", p.linear_coefficient},
            {"quadratic_coefficient", p.quadratic_coefficient},
            {"config", to_json(c)}};
}

json run_calibrate(const RunConfig &c) {
    const CalibrationSettings &s = c.experiment.calibration;
    LinearScanOptions scan = s.scan;
    scan.threads = c.experiment.threads;
    json out;
    if (s.orders == 1) {
        const PulseShape shape = c.pulse.with_amplitude(s.amplitude);
        const LinearCalibration r =
            calibrate_linear(train_objective(c.chain, shape, c.experiment.pulses, c.measurement(), s.amplitude), scan);
        out = {{"phi_c_prime", r.optimum},
               {"best_observed", r.best_observed},
               {"tie", r.tie},
               {"evaluations", r.evaluations},
               {"grid", r.grid},
               {"values", r.values}};
    } else {
        std::vector<PulseShape> shapes{c.pulse.with_amplitude(s.amplitude)};
        shapes.insert(shapes.end(), s.trains.begin(), s.trains.end());
        PolynomialOptions options;
        options.orders = s.orders;
        options.budget = s.budget;
        options.scans = s.ranges.empty() ? std::vector<LinearScanOptions>{scan} : s.ranges;
        for (auto &r : options.scans) {
            r.threads = c.experiment.threads;
        }
        const PolynomialCalibration r =
            calibrate_polynomial(polynomial_objective(c.chain, shapes, c.experiment.pulses, c.measurement()), options);
        out = {{"phi_c_prime", r.coefficients.front()},
               {"coefficients", r.coefficients},
               {"achieved", r.achieved},
               {"converged", r.converged},
               {"hit_boundary", r.hit_boundary},
               {"evaluations", r.evaluations},
               {"sweeps", r.sweeps}};
    }
    out["config"] = to_json(c);
    return out;
}

std::string run_rb(const RunConfig &c) {
    const RbTable table = simulate_rb(c.rb());
    const RbFit fit = fit_rb_decay_bootstrap(table, c.experiment.rb.bootstrap, c.experiment.seed, fit_options(c));
    CsvWriter csv(c, {"m", "randomization", "P0"});
    csv.comment("fit", fit_json(fit));
    for (std::size_t li = 0; li < table.lengths.size(); li++) {
        for (std::size_t ri = 0; ri < table.survival[li].size(); ri++) {
            csv.row({static_cast<double>(table.lengths[li]), static_cast<double>(ri), table.survival[li][ri]});
        }
    }
    return csv.str();
}

std::string run_rb_scan(const RunConfig &c) {
    const auto points =
        rb_compensation_scan(c.rb(), c.experiment.phi_c_prime.values(), c.experiment.rb.bootstrap, fit_options(c));
    CsvWriter csv(c, {"phi_c_prime", "error_per_clifford", "sigma_error", "bootstrap_sigma_error", "p", "A", "B",
                      "p_clamped"});
    for (const RbScanPoint &pt : points) {
        const RbFit &f = pt.fit;
        csv.row({pt.compensation_slope, f.error_per_clifford, f.sigma_error, f.bootstrap_sigma_error, f.p,
                 f.amplitude, f.offset, f.p_clamped ? 1.0 : 0.0});
    }
    return csv.str();
}

json issues_json(const std::vector<ConfigIssue> &issues) {
    json list = json::array();
    for (const auto &i : issues) {
        list.push_back({{"key", i.key}, {"message", i.message}});
    }
    return list;
}

int fail(int code, const json &record) {
    std::cerr << record.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Phase-distortion calibration and benchmarking runner"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<double> step;

    const std::vector<std::pair<const char *, const char *>> commands{
        {"rabi", "single-pulse amplitude scan (A, P0)"},
        {"train", "N-pulse train amplitude scan (A, P0)"},
        {"map", "2-D scan over amplitude and compensation slope (A, phi_c_prime, P0)"},
        {"sandwich", "pi/2-pi-pi/2 phase-difference probe (JSON)"},
        {"period", "revival spacing and amplitude nonlinearity (JSON)"},
        {"calibrate", "compensation calibration at A = 1 (JSON)"},
        {"rb", "randomized benchmarking survival table (m, randomization, P0)"},
        {"rb-scan", "RB error per Clifford versus compensation slope"},
        {"validate", "check a config without running anything (JSON report)"},
    };
    for (const auto &[name, description] : commands) {
        CLI::App *sub = app.add_subcommand(name, description);
        sub->add_option("--config,-c", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", out_path, "output file (default: stdout)");
        sub->add_option("--seed", seed, "override experiment.seed");
        sub->add_option("--threads", threads, "override experiment.threads (0 = all cores)");
        sub->add_option("--step", step, "override experiment.step (integrator slice, s)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    json doc;
    {
        std::ifstream in(config_path);
        try {
            doc = json::parse(in);
        } catch (const json::parse_error &e) {
            return fail(kExitValidation, {{"error", "validation"},
                                          {"issues", issues_json({{"config", e.what()}})}});
        }
    }
    if (doc.is_object()) {
        json &exp = doc["experiment"];
        if (exp.is_null()) {
            exp = json::object();
        }
        if (exp.is_object()) {
            if (seed) {
                exp["seed"] = *seed;
            }
            if (threads) {
                exp["threads"] = *threads;
            }
            if (step) {
                exp["step"] = *step;
            }
        }
    }

    const std::vector<ConfigIssue> issues = validate_config(doc);
    if (command == "validate") {
        emit_json(out_path, {{"valid", issues.empty()}, {"issues", issues_json(issues)}});
        return issues.empty() ? 0 : kExitValidation;
    }
    if (!issues.empty()) {
        return fail(kExitValidation, {{"error", "validation"}, {"issues", issues_json(issues)}});
    }

    try {
        const RunConfig config = parse_config(doc);
        if (command == "rabi") {
            emit(out_path, run_scan(config, 1));
        } else if (command == "train") {
            emit(out_path, run_scan(config, config.experiment.pulses));
        } else if (command == "map") {
            emit(out_path, run_map(config));
        } else if (command == "sandwich") {
            emit_json(out_path, run_sandwich(config));
        } else if (command == "period") {
            emit_json(out_path, run_period(config));
        } else if (command == "calibrate") {
            emit_json(out_path, run_calibrate(config));
        } else if (command == "rb") {
            emit(out_path, run_rb(config));
        } else if (command == "rb-scan") {
            emit(out_path, run_rb_scan(config));
        }
    } catch (const Error &e) {
        const int code = e.kind() == ErrorKind::Config ? kExitValidation : kExitRuntime;
        return fail(code, {{"error", std::string(to_string(e.kind()))},
                           {"command", command},
                           {"key", e.key()},
                           {"message", e.what()}});
    } catch (const std::exception &e) {
        return fail(kExitRuntime, {{"error", "internal"}, {"command", command}, {"message", e.what()}});
    }
    return 0;
}
