// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sfde/drift.hpp"
#include "sfde/errors.hpp"
#include "sfde/noise.hpp"
#include "sfde/parallel.hpp"
#include "sfde/segment.hpp"
#include "sfde/stats.hpp"

namespace sfde {

/// Paths with |X| above this value are treated as diverged.
inline constexpr double kDivergenceSentinel = 1e12;

/// Grid, horizon T and drift of one integration run. T must be a positive
/// multiple of dt.
class SolverConfig {
public:
    SolverConfig(TimeGrid grid, double horizon, DriftSpec drift);

    const TimeGrid& grid() const noexcept { return grid_; }
    double horizon() const noexcept { return horizon_; }
    const DriftSpec& drift() const noexcept { return drift_; }
    std::uint64_t steps() const noexcept { return steps_; }

    SolverConfig with_horizon(double horizon) const { return {grid_, horizon, drift_}; }

private:
    TimeGrid grid_;
    double horizon_;
    DriftSpec drift_;
    std::uint64_t steps_;
};

/// Bounded functional of a segment, f: C -> R.
using SegmentFunctional = std::function<double(SegmentView)>;

namespace detail {

/// Throws DivergenceError when the state is non-finite or beyond the sentinel.
inline void check_state(std::span<const double> x, std::uint64_t step) {
    double n2 = 0.0;
    for (double c : x) n2 += c * c;
    if (!std::isfinite(n2) || n2 > kDivergenceSentinel * kDivergenceSentinel)
        throw DivergenceError(step, std::nullopt, "state diverged at step " + std::to_string(step));
}

/// next = x(0) + V(x) dt + dw. The single Euler-Maruyama update used by every
/// integrator so that coupled and plain runs agree bit for bit.
inline void euler_step(const DriftSpec& drift, SegmentView x, std::span<const double> dw, double dt,
                       std::span<double> drift_buf, std::span<double> next) {
    eval_drift(drift, x, drift_buf);
    const auto now = x.now();
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = now[i] + drift_buf[i] * dt + dw[i];
}

}  // namespace detail

/// Explicit Euler-Maruyama for dX = V(X_t) dt + dW with drift frozen at the
/// left end of each step. The history holds the initial segment followed by
/// T/dt new points.
template <IncrementSource Source>
TrajectoryHistory simulate_with(const SolverConfig& config, const Segment& initial, const Source& noise) {
    if (!(initial.grid() == config.grid())) throw IncompatibleGridError("simulate: initial segment is on another grid");
    const auto& grid = config.grid();
    const auto d = grid.dimension();
    const double dt = grid.dt();
    TrajectoryHistory history(initial);
    history.reserve_steps(config.steps());
    std::vector<double> drift(d), dw(d), next(d);
    for (std::uint64_t k = 0; k < config.steps(); ++k) {
        noise.increment(k, dt, dw);
        detail::euler_step(config.drift(), history.window(k), dw, dt, drift, next);
        detail::check_state(next, k + 1);
        history.append(next);
    }
    return history;
}

TrajectoryHistory simulate(const SolverConfig& config, const Segment& initial, const NoiseStream& noise);

/// Values of each functional on X_T for paths 0..n_paths-1 (path p driven by
/// NoiseStream(master_seed, p)). Result is indexed [functional][path].
std::vector<std::vector<double>> terminal_values(const SolverConfig& config, const Segment& initial,
                                                 std::span<const SegmentFunctional> functionals,
                                                 const McOptions& mc);

/// Monte Carlo estimate of P_T f(initial) = E f(X_T).
McEstimate estimate_pTf_direct(const SolverConfig& config, const Segment& initial, const SegmentFunctional& f,
                               const McOptions& mc);

}  // namespace sfde
