// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfde/drift.hpp"
#include "sfde/functionals.hpp"
#include "sfde/noise.hpp"
#include "sfde/parallel.hpp"
#include "sfde/segment.hpp"
#include "sfde/solver.hpp"
#include "sfde/stats.hpp"

namespace sfde {

/// Exponents of e^{eps ||x||^2} above this (natural-log scale) are flagged as overflow.
inline constexpr double kMomentExponentCap = 700.0;

/// Linear decay v(z) = -lambda0 z with a bounded memory term.
struct OUExampleConfig {
    double lambda0 = 1.0;
    MemoryFunctional memory = MemoryFunctional::zero();
    double moment_eps = 0.1;     ///< exponent of E e^{eps ||X_t||^2}
    double lambda_target = 0.0;  ///< lambda of the integrability condition

    DriftSpec drift() const { return {DissipativeField::linear(lambda0), memory}; }

    /// Requires lambda0 > 0, 0 <= moment_eps < lambda0 and a bounded memory term.
    void validate() const;
};

struct IntegrabilityCondition {
    double threshold = 0.0;  ///< 4 (2 L + r L^2)
    bool target_above_threshold = false;
    bool target_below_lambda0 = false;
    bool lambda0_above_threshold = false;

    bool holds() const noexcept { return target_above_threshold && target_below_lambda0; }
};

IntegrabilityCondition integrability_condition(const OUExampleConfig& config, double r);

/// max_k |X(t_k) - RHS(t_k)| where
///   RHS(t_k) = e^{-l t_k} X(0) + sum_{j<k} e^{-l (t_k - t_j)} (Z(X_{t_j}) dt + dW_j)
/// is the variation-of-constants form with left-point weights, rebuilt from
/// the same increments the trajectory was driven by.
template <IncrementSource Source>
double ou_identity_residual(const SolverConfig& config, const TrajectoryHistory& trajectory, const Source& noise) {
    const auto& drift = config.drift();
    if (drift.dissipative.kind() != DissipativeKind::Linear)
        throw ContractError("ou_identity_residual: drift must use the linear dissipative field");
    if (!(trajectory.grid() == config.grid())) throw IncompatibleGridError("ou_identity_residual: grid mismatch");
    const auto& grid = config.grid();
    const auto d = grid.dimension();
    const double dt = grid.dt();
    const double lambda = drift.dissipative.lambda0();
    const double decay = std::exp(-lambda * dt);

    const auto x0 = trajectory.at_step(0);
    std::vector<double> conv(d, 0.0), z(d), dw(d), diff(d);
    double worst = 0.0;
    for (std::uint64_t k = 0; k < trajectory.steps(); ++k) {
        drift.memory.eval(trajectory.window(k), z);
        noise.increment(k, dt, dw);
        for (std::size_t i = 0; i < d; ++i) conv[i] = decay * (conv[i] + z[i] * dt + dw[i]);
        const double e = std::exp(-lambda * static_cast<double>(k + 1) * dt);
        const auto x = trajectory.at_step(k + 1);
        for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - (e * x0[i] + conv[i]);
        worst = std::max(worst, euclidean_norm(diff));
    }
    return worst;
}

struct MomentRow {
    double t = 0.0;
    McEstimate segment_moment;   ///< E e^{eps ||X_t||^2}
    McEstimate endpoint_moment;  ///< E e^{eps |X(t)|^2}
    std::uint64_t overflow_flags = 0;
    double running_max = 0.0;    ///< max of segment_moment.mean up to t
};

struct MomentTable {
    std::vector<MomentRow> rows;
    std::uint64_t overflow_flags = 0;
    LinearFit trailing_trend;  ///< moment vs t over the trailing half of checkpoints
    bool upward_trend = false;
    /// No significant upward trend on the trailing half and no overflow flags.
    bool stabilized = false;
};

/// Exponential moments of the segment sup-norm at checkpoints 0, spacing,
/// 2 spacing, ... up to config.horizon(). An upward trend is a one-sided
/// slope test at the given confidence.
MomentTable exp_moment_estimate(const SolverConfig& config, const Segment& initial, double moment_eps,
                                double checkpoint_spacing, const McOptions& mc, double trend_confidence = 0.95);

struct SampledSegment {
    double t = 0.0;
    std::uint64_t chain = 0;
    Segment segment;
};

/// Approximate draws from the invariant measure: after burn_in, segments every
/// `spacing` time units (spacing >= r) along n_chains independent chains.
std::vector<SampledSegment> stationary_sampler(const SolverConfig& config, const Segment& initial, double burn_in,
                                               double spacing, std::uint64_t n_samples, std::uint64_t n_chains,
                                               std::uint64_t master_seed, unsigned threads = 0);

/// x(0) components (first coordinate) of the samples.
std::vector<double> terminal_marginal(std::span<const SampledSegment> samples);

struct IntegrabilityDiagnostic {
    McEstimate moment;  ///< empirical int e^{lambda ||x||^2} d mu
    std::uint64_t overflow_flags = 0;
};

IntegrabilityDiagnostic integrability_diagnostic(std::span<const SampledSegment> samples, double lambda);

struct HyperboundRow {
    std::string functional;
    double l4_norm_of_semigroup = 0.0;  ///< (int (P_T f)^4 d mu)^(1/4)
    double l2_norm = 0.0;               ///< (int f^2 d mu)^(1/2)
    double ratio = 0.0;
};

/// Per-function ratios ||P_T f||_4 / ||f||_2 under the empirical measure.
/// This is a diagnostic, not an operator-norm bound. Requires T > r + 1/L.
std::vector<HyperboundRow> hyperbounded_diagnostic(const SolverConfig& config,
                                                   std::span<const SampledSegment> samples,
                                                   std::span<const Functional> functionals, const McOptions& inner);

}  // namespace sfde
