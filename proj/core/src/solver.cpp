// SPDX-License-Identifier: Apache-2.0
#include "sfde/solver.hpp"

#include <string>

namespace sfde {

SolverConfig::SolverConfig(TimeGrid grid, double horizon, DriftSpec drift)
    : grid_(grid), horizon_(horizon), drift_(drift), steps_(0) {
    if (!(horizon >= grid.dt())) throw DomainError("solver: horizon T must be >= dt");
    steps_ = grid.steps_for(horizon);
}

TrajectoryHistory simulate(const SolverConfig& config, const Segment& initial, const NoiseStream& noise) {
    return simulate_with(config, initial, noise);
}

std::vector<std::vector<double>> terminal_values(const SolverConfig& config, const Segment& initial,
                                                 std::span<const SegmentFunctional> functionals,
                                                 const McOptions& mc) {
    std::vector<std::vector<double>> out(functionals.size(), std::vector<double>(mc.n_paths));
    parallel_for(mc.n_paths, mc.threads, [&](std::uint64_t p) {
        try {
            const auto h = simulate(config, initial, NoiseStream(mc.master_seed, p));
            const auto terminal = h.window(h.steps());
            for (std::size_t j = 0; j < functionals.size(); ++j) out[j][p] = functionals[j](terminal);
        } catch (const DivergenceError& e) {
            throw DivergenceError(e.step(), p, std::string(e.what()) + " on path " + std::to_string(p));
        }
    });
    return out;
}

McEstimate estimate_pTf_direct(const SolverConfig& config, const Segment& initial, const SegmentFunctional& f,
                               const McOptions& mc) {
    const auto values = terminal_values(config, initial, std::span<const SegmentFunctional>(&f, 1), mc);
    return summarize(values.front());
}

}  // namespace sfde
