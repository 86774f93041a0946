// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfde/harness/config.hpp"
#include "sfde/harness/csv.hpp"

namespace sfde::harness {

struct Check {
    std::string name;
    bool pass = false;
};

/// One row of the long-format plot table.
struct PlotRow {
    std::string series;
    double x = 0.0;
    double y = 0.0;
    double y_err = 0.0;
};

struct ExperimentResult {
    nlohmann::json results = nlohmann::json::object();
    std::vector<Check> checks;
    std::vector<PlotRow> plot;
    /// Set when a numerical failure (e.g. divergence) aborted the run.
    std::optional<std::string> error;

    bool pass() const;
};

/// Every structural precondition of the experiment; throws ConfigError.
void validate_experiment(const ExperimentConfig& c);

/// Segment samples drawn by the stationary experiment, oldest point first.
struct SampleTable {
    std::vector<double> t;
    std::vector<std::vector<double>> values;
};

/// Runs the configured experiment. With a sink, per-path rows are written to
/// it; stationary runs also fill `samples` when given.
ExperimentResult run_experiment(const ExperimentConfig& c, CsvWriter* paths = nullptr, SampleTable* samples = nullptr);

}  // namespace sfde::harness
