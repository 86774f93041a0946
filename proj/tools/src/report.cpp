// SPDX-License-Identifier: Apache-2.0
#include "sfde/harness/report.hpp"

#include <fstream>
#include <optional>

#include "sfde/harness/csv.hpp"

#ifndef SFDE_VERSION
#define SFDE_VERSION "0.0.0"
#endif

namespace sfde::harness {

using nlohmann::json;

std::string_view tool_version() noexcept { return SFDE_VERSION; }

json build_report(const ExperimentConfig& c, const ExperimentResult& r) {
    json j;
    j["tool"] = {{"name", "sfdekit"}, {"version", std::string(tool_version())}};
    j["experiment"] = std::string(to_string(c.experiment));
    j["seed"] = c.monte_carlo.seed;
    j["config"] = to_json(c);
    j["results"] = r.results;
    json checks = json::array();
    for (const auto& ch : r.checks) checks.push_back({{"name", ch.name}, {"pass", ch.pass}});
    j["checks"] = checks;
    j["error"] = r.error ? json(*r.error) : json(nullptr);
    j["verdict"] = r.pass() ? "pass" : "fail";
    return j;
}

void write_plotdata(std::ostream& out, const std::vector<PlotRow>& rows) {
    CsvWriter w(out);
    w.header({"series", "x", "y", "y_err"});
    for (const auto& row : rows) {
        w.cell(row.series).cell(row.x).cell(row.y).cell(row.y_err);
        w.end_row();
    }
}

void write_samples(std::ostream& out, const SampleTable& samples, std::size_t n_points, std::size_t dimension) {
    CsvWriter w(out);
    std::vector<std::string> cols{"t"};
    for (std::size_t k = 0; k < n_points; ++k)
        for (std::size_t i = 0; i < dimension; ++i) cols.push_back("p" + std::to_string(k) + "_x" + std::to_string(i));
    w.header(cols);
    for (std::size_t s = 0; s < samples.t.size(); ++s) {
        w.cell(samples.t[s]);
        for (double v : samples.values[s]) w.cell(v);
        w.end_row();
    }
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("--out", std::nullopt, "cannot write '" + p.string() + "'");
    return f;
}

}  // namespace

ExperimentResult run_and_write(const ExperimentConfig& c, const std::filesystem::path& out_dir, bool emit_paths,
                               WrittenFiles* written) {
    validate_experiment(c);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("--out", std::nullopt, "cannot create '" + out_dir.string() + "': " + ec.message());

    const auto note = [&](const std::filesystem::path& p) {
        if (written) written->files.push_back(p);
    };

    std::optional<std::ofstream> paths_file;
    std::optional<CsvWriter> paths_writer;
    if (emit_paths) {
        paths_file.emplace(open_out(out_dir / "paths.csv"));
        paths_writer.emplace(*paths_file);
        note(out_dir / "paths.csv");
    }
    SampleTable samples;
    const auto result = run_experiment(c, paths_writer ? &*paths_writer : nullptr, &samples);
    if (paths_file) paths_file->close();

    {
        auto f = open_out(out_dir / "report.json");
        f << build_report(c, result).dump(2) << '\n';
        note(out_dir / "report.json");
    }
    {
        auto f = open_out(out_dir / "plotdata.csv");
        write_plotdata(f, result.plot);
        note(out_dir / "plotdata.csv");
    }
    {
        auto f = open_out(out_dir / "resolved_config.yaml");
        f << to_yaml(c);
        note(out_dir / "resolved_config.yaml");
    }
    if (c.experiment == ExperimentKind::Stationary && !result.error) {
        const auto grid = make_grid(c);
        auto f = open_out(out_dir / "samples.csv");
        write_samples(f, samples, grid.points(), grid.dimension());
        note(out_dir / "samples.csv");
    }
    return result;
}

}  // namespace sfde::harness
