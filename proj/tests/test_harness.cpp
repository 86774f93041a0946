// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "sfde/harness/config.hpp"
#include "sfde/harness/csv.hpp"
#include "sfde/harness/experiments.hpp"
#include "sfde/harness/report.hpp"

namespace sfde::harness {
namespace {

const char* kHarnack = R"(experiment: harnack
grid: {dt: 1/32, r: 1, horizon: 2}
drift: sin-point-delay
initial:
  x: 1.0
  y: 0.0
monte_carlo: {paths: 400, seed: 9}
harnack: {p: [2, 4]}
)";

std::string with(const std::string& base, const std::string& from, const std::string& to) {
    auto s = base;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
}

TEST(ExactValue, ParsesDecimalsAndRatios) {
    const auto a = parse_exact("0.0078125");
    EXPECT_EQ(a.num, 1);
    EXPECT_EQ(a.den, 128);
    const auto b = parse_exact("1/128");
    EXPECT_EQ(b.num, 1);
    EXPECT_EQ(b.den, 128);
    const auto c = parse_exact("2.5e-1");
    EXPECT_EQ(c.num, 1);
    EXPECT_EQ(c.den, 4);
    EXPECT_EQ(parse_exact("0.1").den, 10);
    EXPECT_EQ(parse_exact("3").multiple_of(parse_exact("0.1")), std::optional<std::uint64_t>(30));
    EXPECT_FALSE(parse_exact("1").multiple_of(parse_exact("0.3")));
    EXPECT_THROW(parse_exact("abc"), std::invalid_argument);
    EXPECT_THROW(parse_exact("1/0"), std::invalid_argument);
}

TEST(Config, ParsesAndResolvesDefaults) {
    const auto c = parse_config(kHarnack);
    EXPECT_EQ(c.experiment, ExperimentKind::Harnack);
    EXPECT_EQ(make_grid(c).n_memory(), 32u);
    EXPECT_EQ(c.drift.name, "sin-point-delay");
    EXPECT_EQ(c.functionals.size(), 3u);
    EXPECT_FALSE(c.coupling.s);
    EXPECT_EQ(c.monte_carlo.confidence, 0.99);
}

TEST(Config, YamlRoundTrip) {
    const auto c = parse_config(kHarnack);
    const auto text = to_yaml(c);
    EXPECT_EQ(to_yaml(parse_config(text)), text);
    EXPECT_EQ(to_json(parse_config(text)), to_json(c));
}

TEST(Config, ErrorsNameFieldAndLine) {
    try {
        parse_config(with(kHarnack, "horizon: 2", "horizon: 2.01"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "grid.horizon");
        EXPECT_EQ(e.line(), std::optional<int>(2));
    }
    try {
        parse_config(with(kHarnack, "seed: 9", "seed: -9"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "monte_carlo.seed");
    }
    try {
        parse_config(with(kHarnack, "drift: sin-point-delay", "drift: nope"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "drift");
        EXPECT_EQ(e.line(), std::optional<int>(3));
    }
    EXPECT_THROW(parse_config(with(kHarnack, "harnack:", "harnak:")), ConfigError);
    EXPECT_THROW(parse_config(with(kHarnack, "r: 1,", "r: 0.99,")), ConfigError);
    EXPECT_THROW(parse_config("experiment: [unclosed"), ConfigError);
}

TEST(Validation, HarnackNeedsHorizonAboveMemory) {
    const auto c = parse_config(with(kHarnack, "horizon: 2", "horizon: 1"));
    try {
        validate_experiment(c);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "grid.horizon");
        EXPECT_NE(std::string(e.what()).find("requires horizon T > memory length r"), std::string::npos);
    }
    EXPECT_THROW(validate_experiment(parse_config(with(kHarnack, "  y: 0.0\n", ""))), ConfigError);
    EXPECT_THROW(validate_experiment(parse_config(with(kHarnack, "drift:", "coupling: {s: 1}\ndrift:"))), ConfigError);
}

TEST(Csv, QuotesWhenNeeded) {
    EXPECT_EQ(csv_escape("plain"), "plain");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    std::ostringstream os;
    CsvWriter w(os);
    w.header({"a", "b"});
    w.cell(0.1).cell(std::uint64_t{3});
    w.end_row();
    EXPECT_EQ(os.str(), "a,b\n0.1,3\n");
    w.cell(1.0);
    EXPECT_THROW(w.end_row(), std::logic_error);
}

TEST(Plotdata, EmptyReportIsHeaderOnly) {
    std::ostringstream os;
    write_plotdata(os, {});
    EXPECT_EQ(os.str(), "series,x,y,y_err\n");
}

TEST(Experiments, HarnackIdenticalStartsHasZeroRho) {
    const auto c = parse_config(with(with(kHarnack, "y: 0.0", "y: 1.0"), "paths: 400", "paths: 10000"));
    const auto r = run_experiment(c);
    EXPECT_TRUE(r.pass());
    for (const auto& row : r.results["rows"]) EXPECT_EQ(row["rho_sq"].get<double>(), 0.0);
}

TEST(Experiments, ReportIsDeterministicAcrossThreadCounts) {
    auto c = parse_config(kHarnack);
    c.monte_carlo.threads = 1;
    const auto a = build_report(c, run_experiment(c)).dump(2);
    c.monte_carlo.threads = 3;
    const auto b = build_report(c, run_experiment(c)).dump(2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("\"seed\": 9"), std::string::npos);
    EXPECT_NE(a.find("\"config\""), std::string::npos);
}

TEST(Experiments, CouplePlotHasMatchingSeries) {
    const auto c = parse_config(with(kHarnack, "experiment: harnack", "experiment: couple"));
    const auto r = run_experiment(c);
    std::vector<double> rx, bx;
    for (const auto& row : r.plot) (row.series == "R" ? rx : bx).push_back(row.x);
    EXPECT_FALSE(rx.empty());
    EXPECT_EQ(rx, bx);
    EXPECT_TRUE(r.pass());
}

TEST(Experiments, StrongFellerHasOneRowPerDeltaAndFunctional) {
    const auto c = parse_config(with(with(kHarnack, "experiment: harnack", "experiment: strong-feller"),
                                     "harnack: {p: [2, 4]}", "strong_feller: {deltas: [0.5, 0.25]}"));
    const auto r = run_experiment(c);
    EXPECT_EQ(r.results["rows"].size(), 2u * c.functionals.size());
}

TEST(Experiments, DivergenceIsReportedNotThrown) {
    const auto c = parse_config(R"(experiment: simulate
grid: {dt: 1, r: 1, horizon: 10}
drift: {dissipative: {kind: cubic}}
initial: {x: 10}
monte_carlo: {paths: 2}
)");
    const auto r = run_experiment(c);
    ASSERT_TRUE(r.error);
    EXPECT_FALSE(r.pass());
}

}  // namespace
}  // namespace sfde::harness
