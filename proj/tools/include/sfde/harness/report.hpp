// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfde/harness/config.hpp"
#include "sfde/harness/experiments.hpp"

namespace sfde::harness {

std::string_view tool_version() noexcept;

/// Summary record: tool version, experiment, seed, resolved config, results,
/// checks and verdict. Contains nothing that varies between identical runs.
nlohmann::json build_report(const ExperimentConfig& c, const ExperimentResult& r);

/// Long-format plot table with header series,x,y,y_err.
void write_plotdata(std::ostream& out, const std::vector<PlotRow>& rows);

/// One row per segment: t, then the (n_memory + 1) * d values, oldest first.
void write_samples(std::ostream& out, const SampleTable& samples, std::size_t n_points, std::size_t dimension);

struct WrittenFiles {
    std::vector<std::filesystem::path> files;
};

/// Runs the experiment and writes report.json, plotdata.csv,
/// resolved_config.yaml (and paths.csv / samples.csv when applicable) under out_dir.
ExperimentResult run_and_write(const ExperimentConfig& c, const std::filesystem::path& out_dir, bool emit_paths,
                               WrittenFiles* written = nullptr);

}  // namespace sfde::harness
