// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sfde/errors.hpp"
#include "sfde/harness/config.hpp"
#include "sfde/harness/report.hpp"

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> paths;
    std::optional<unsigned> threads;
    std::string out;
    bool emit_paths = false;
};

constexpr int kPass = 0;
constexpr int kVerdictFail = 1;
constexpr int kConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
    using namespace sfde::harness;

    CLI::App app{"sfdekit: segment SFDE simulation, coupling, Harnack and stationary experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    Options opt;
    std::optional<ExperimentKind> chosen;
    const std::pair<ExperimentKind, const char*> commands[] = {
        {ExperimentKind::Simulate, "Euler-Maruyama paths and terminal functional estimates"},
        {ExperimentKind::Couple, "coupled paths, gap decay and Girsanov density checks"},
        {ExperimentKind::Harnack, "Monte Carlo check of the Harnack inequality"},
        {ExperimentKind::StrongFeller, "semigroup gaps against the total-variation bound"},
        {ExperimentKind::Stationary, "exponential moments and invariant-measure diagnostics"},
    };
    for (const auto& [kind, help] : commands) {
        auto* sub = app.add_subcommand(std::string(to_string(kind)), help);
        sub->add_option("--config", opt.config, "experiment config (YAML)")->required();
        sub->add_option("--seed", opt.seed, "override monte_carlo.seed");
        sub->add_option("--paths", opt.paths, "override monte_carlo.paths");
        sub->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_flag("--emit-paths", opt.emit_paths, "write per-path CSV");
        sub->callback([&chosen, k = kind] { chosen = k; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kConfigError;
    }

    try {
        auto cfg = load_config(opt.config);
        if (cfg.experiment != *chosen)
            throw ConfigError("experiment", std::nullopt,
                              "config is for '" + std::string(to_string(cfg.experiment)) + "', not '" +
                                  std::string(to_string(*chosen)) + "'");
        if (opt.seed) cfg.monte_carlo.seed = *opt.seed;
        if (opt.paths) {
            if (*opt.paths < 2) throw ConfigError("--paths", std::nullopt, "need at least 2 paths");
            cfg.monte_carlo.paths = *opt.paths;
        }
        if (opt.threads) cfg.monte_carlo.threads = *opt.threads;
        const std::filesystem::path out = !opt.out.empty() ? opt.out : cfg.output_dir.value_or("sfdekit-out");

        WrittenFiles files;
        const auto result = run_and_write(cfg, out, opt.emit_paths, &files);
        for (const auto& c : result.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
        if (result.error) std::cout << "ERROR " << *result.error << '\n';
        std::cout << "verdict: " << (result.pass() ? "pass" : "fail") << '\n';
        for (const auto& f : files.files) std::cout << "wrote " << f.string() << '\n';
        return result.pass() ? kPass : kVerdictFail;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const sfde::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}
