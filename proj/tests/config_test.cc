#include "pdcal/config.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pdcal/error.h"

using namespace pdcal;
using nlohmann::json;

namespace {

json paper_config() {
    return json::parse(R"({
        "pulse": {"duration": 1.2e-6, "ramp": 2e-7},
        "chain": {"native": [0.0, {"turns": 1.8e-3}]},
        "noise": {"T2": null, "spam": 0.0},
        "experiment": {"pulses": 200}
    })");
}

bool has_key(const std::vector<ConfigIssue> &issues, const std::string &key) {
    return std::any_of(issues.begin(), issues.end(), [&](const ConfigIssue &i) { return i.key == key; });
}

}  // namespace

TEST(Config, PaperParametersValidate) {
    EXPECT_TRUE(validate_config(paper_config()).empty());
    const RunConfig c = parse_config(paper_config());
    EXPECT_EQ(c.pulse.duration, 1.2e-6);
    EXPECT_EQ(c.pulse.ramp, 2e-7);
    EXPECT_EQ(c.pulse.amplitude, 1.0);
    EXPECT_NEAR(c.chain.native.terms.coefficients().at(1), 2.0 * kPi * 1.8e-3, 1e-18);
    EXPECT_FALSE(c.noise.dephasing());
    EXPECT_EQ(c.experiment.pulses, 200);
    EXPECT_NEAR(c.chain.rabi_rate, rabi_normalization(c.pulse), 1e-6);
}

TEST(Config, RampTooLongNamesPulseShapeRamp) {
    json doc = paper_config();
    doc["pulse"]["ramp"] = 0.7e-6;
    EXPECT_TRUE(has_key(validate_config(doc), "PulseShape.ramp"));
    try {
        parse_config(doc);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
        EXPECT_EQ(e.key(), "PulseShape.ramp");
    }
}

TEST(Config, NegativeT2NamesNoiseModelT2) {
    json doc = paper_config();
    doc["noise"]["T2"] = -1e-3;
    EXPECT_TRUE(has_key(validate_config(doc), "NoiseModel.T2"));
}

TEST(Config, MissingRequiredKeysAreNamed) {
    json doc = paper_config();
    doc["pulse"].erase("duration");
    EXPECT_TRUE(has_key(validate_config(doc), "pulse.duration"));
    doc = paper_config();
    doc.erase("pulse");
    EXPECT_TRUE(has_key(validate_config(doc), "pulse"));
}

TEST(Config, UnknownKeysAreReported) {
    json doc = paper_config();
    doc["pulse"]["shape"] = "gauss";
    doc["experiment"]["rb"] = {{"lenghts", {1, 2, 4}}};
    const auto issues = validate_config(doc);
    EXPECT_TRUE(has_key(issues, "pulse.shape"));
    EXPECT_TRUE(has_key(issues, "experiment.rb.lenghts"));
}

TEST(Config, AllIssuesAreCollected) {
    json doc = paper_config();
    doc["pulse"]["duration"] = "long";
    doc["experiment"]["shots"] = 1.5;
    doc["noise"]["spam"] = "x";
    EXPECT_GE(validate_config(doc).size(), 3u);
}

TEST(Config, TurnsAreTwoPiRadians) {
    json doc = paper_config();
    doc["experiment"]["phi_c_prime"] = {{"start", {{"turns", -1e-3}}}, {"stop", {{"turns", 1e-3}}}, {"count", 3}};
    const std::vector<double> v = parse_config(doc).experiment.phi_c_prime.values();
    ASSERT_EQ(v.size(), 3u);
    EXPECT_DOUBLE_EQ(v[0], -2.0 * kPi * 1e-3);
    EXPECT_EQ(v[1], 0.0);
    EXPECT_DOUBLE_EQ(v[2], 2.0 * kPi * 1e-3);
    doc["experiment"]["phi_c_prime"] = {{{"turns", 0.5}}, 1.0};
    EXPECT_EQ(parse_config(doc).experiment.phi_c_prime.values(), (std::vector<double>{kPi, 1.0}));
    doc["experiment"]["phi_c_prime"] = {{{"turn", 0.5}}};
    EXPECT_TRUE(has_key(validate_config(doc), "experiment.phi_c_prime[0]"));
}

TEST(Config, GridRangeEndpointsAreExact) {
    const std::vector<double> v = Grid::range(0.0, 1.2, 2401).values();
    ASSERT_EQ(v.size(), 2401u);
    EXPECT_EQ(v.front(), 0.0);
    EXPECT_EQ(v.back(), 1.2);
    EXPECT_EQ(v[2000], 1.0);
    EXPECT_EQ(Grid::range(0.3, 0.7, 1).values(), std::vector<double>{0.3});
}

TEST(Config, EmptyGridIsRejected) {
    json doc = paper_config();
    doc["experiment"]["amplitudes"] = json::array();
    EXPECT_TRUE(has_key(validate_config(doc), "experiment.amplitudes"));
}

TEST(Config, CanonicalFormRoundTrips) {
    json doc = paper_config();
    doc["noise"]["T2"] = 2.4e-2;
    doc["noise"]["spam"] = 0.05;
    doc["chain"]["nonlinearity"] = {0.0, 1.0, -0.02};
    doc["experiment"]["shots"] = 500;
    doc["experiment"]["seed"] = 77;
    doc["experiment"]["calibration"] = {{"orders", 2}, {"trains", {{{"duration", 2.2e-6}, {"amplitude", 0.5}}}}};
    doc["experiment"]["rb"] = {{"lengths", {{"longest", 1024}}}, {"fixed_offset", 0.5}, {"strategy", "PiHalfOnly"}};
    const RunConfig c = parse_config(doc);
    const json canonical = to_json(c);
    EXPECT_EQ(to_json(parse_config(canonical)), canonical);
    EXPECT_TRUE(validate_config(canonical).empty());

    const RunConfig back = parse_config(canonical);
    EXPECT_EQ(back.noise.t2, c.noise.t2);
    EXPECT_EQ(back.chain.rabi_rate, c.chain.rabi_rate);
    EXPECT_EQ(back.experiment.rb.lengths, c.experiment.rb.lengths);
    EXPECT_EQ(back.experiment.rb.strategy, DecompositionStrategy::PiHalfOnly);
    EXPECT_EQ(back.experiment.rb.fixed_offset, 0.5);
    ASSERT_EQ(back.experiment.calibration.trains.size(), 1u);
    EXPECT_EQ(back.experiment.calibration.trains[0].ramp, 2e-7);
}

TEST(Config, InfiniteT2IsWrittenAsNull) {
    EXPECT_TRUE(to_json(parse_config(paper_config()))["noise"]["T2"].is_null());
}

TEST(Config, UnknownStrategyIsConfigError) {
    json doc = paper_config();
    doc["experiment"]["rb"] = {{"strategy", "Magic"}};
    EXPECT_TRUE(has_key(validate_config(doc), "RbConfig.strategy"));
}

TEST(Config, NonObjectDocumentIsRejected) {
    const auto issues = validate_config(json::array());
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_EQ(issues[0].key, "config");
}

TEST(Config, MeasurementAndRbViewsCarrySettings) {
    json doc = paper_config();
    doc["noise"]["spam"] = 0.05;
    doc["experiment"]["shots"] = 300;
    doc["experiment"]["seed"] = 9;
    doc["experiment"]["step"] = 0.5e-9;
    const RunConfig c = parse_config(doc);
    const MeasurementOptions m = c.measurement();
    EXPECT_EQ(m.shots, 300);
    EXPECT_EQ(m.seed, 9u);
    EXPECT_EQ(m.step, 0.5e-9);
    EXPECT_EQ(m.noise.spam, 0.05);
    const RbConfig rb = c.rb();
    EXPECT_EQ(rb.seed, 9u);
    EXPECT_EQ(rb.lengths.back(), 1 << 20);
    EXPECT_EQ(rb.randomizations, 20);
}

TEST(Config, LoadFileErrors) {
    EXPECT_THROW(load_config_file("/nonexistent/config.json"), Error);
}
