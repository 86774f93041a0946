// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sfde/drift.hpp"
#include "sfde/functionals.hpp"
#include "sfde/segment.hpp"
#include "sfde/solver.hpp"

namespace sfde::harness {

enum class ExperimentKind { Simulate, Couple, Harnack, StrongFeller, Stationary };

std::string_view to_string(ExperimentKind k) noexcept;
std::optional<ExperimentKind> parse_experiment(std::string_view s) noexcept;

/// Invalid configuration; carries the offending field and, when known, its line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, std::optional<int> line, const std::string& message);

    const std::string& field() const noexcept { return field_; }
    std::optional<int> line() const noexcept { return line_; }

private:
    std::string field_;
    std::optional<int> line_;
};

/// A decimal ("0.0078125", "1e-3") or ratio ("1/128") held exactly as num/den.
struct ExactValue {
    std::string text;
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    /// this / other when it is a nonnegative integer.
    std::optional<std::uint64_t> multiple_of(const ExactValue& other) const;
};

/// Throws std::invalid_argument on malformed text or values beyond 64-bit range.
ExactValue parse_exact(std::string_view text);

/// Initial segment descriptor. Components are broadcast when a single number is given.
///  - constant: x(u) = value
///  - linear:   x(u) interpolates start at u = -r and end at u = 0
///  - sine:     x(u) = offset + amplitude sin(frequency u + phase)
///  - values:   n_memory + 1 rows of d numbers, oldest first
struct SegmentDescriptor {
    std::string kind = "constant";
    std::vector<double> value{0.0};
    std::vector<double> start;
    std::vector<double> end;
    std::vector<double> amplitude;
    std::vector<double> offset;
    double frequency = 1.0;
    double phase = 0.0;
    std::vector<std::vector<double>> rows;
};

Segment build_segment(const SegmentDescriptor& d, const TimeGrid& grid);

/// sigmoid(scale, center), ball(radius), clipped_integral(lower, upper) or constant(value).
struct FunctionalDescriptor {
    std::string kind = "sigmoid";
    std::vector<double> params;
};

Functional build_functional(const FunctionalDescriptor& d);
std::vector<FunctionalDescriptor> default_functional_descriptors();

struct DriftDescriptor {
    std::string name;
    DriftSpec spec;
};

struct MonteCarloParams {
    std::uint64_t paths = 1000;
    std::uint64_t seed = 0;
    double confidence = 0.99;
    unsigned threads = 0;  ///< execution detail; not part of the embedded config
};

struct CouplingParams {
    double epsilon = 1e-3;
    std::optional<ExactValue> s;  ///< empty means auto
};

struct HarnackSection {
    std::vector<double> p{2.0};
    std::vector<DriftDescriptor> drifts;  ///< empty means the top-level drift
};

struct StrongFellerSection {
    std::vector<double> deltas{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    SegmentDescriptor direction;  ///< normalized to unit sup-norm before use
};

struct HyperboundSection {
    ExactValue horizon;
    std::uint64_t inner_paths = 200;
    std::uint64_t samples = 100;
};

struct StationarySection {
    double moment_eps = 0.1;
    std::optional<double> lambda_target;  ///< required by the stationary experiment
    double trend_confidence = 0.95;
    ExactValue checkpoint_spacing;
    ExactValue burn_in;
    ExactValue spacing;
    std::uint64_t samples = 1000;
    std::uint64_t chains = 10;
    std::vector<ExactValue> identity_dts;
    std::uint64_t identity_paths = 20;
    std::optional<HyperboundSection> hyperbounded;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Simulate;
    ExactValue dt;
    ExactValue r;
    ExactValue horizon;
    std::size_t dimension = 1;
    DriftDescriptor drift;
    SegmentDescriptor x;
    std::optional<SegmentDescriptor> y;
    CouplingParams coupling;
    MonteCarloParams monte_carlo;
    std::vector<FunctionalDescriptor> functionals;
    HarnackSection harnack;
    StrongFellerSection strong_feller;
    StationarySection stationary;
    std::optional<std::string> output_dir;  ///< not part of the embedded config
};

/// Parses YAML text; every error names the field and line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical YAML of the resolved config. Parsing it gives back an equal config.
std::string to_yaml(const ExperimentConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);

/// n_memory = r / dt checked exactly.
TimeGrid make_grid(const ExperimentConfig& c);
SolverConfig make_solver_config(const ExperimentConfig& c, const DriftSpec& drift);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace sfde::harness
