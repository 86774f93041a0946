// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sfde/noise.hpp"
#include "sfde/segment.hpp"
#include "sfde/solver.hpp"

namespace sfde {

/// H(x) = x |x|^(eps - 1), H(0) = 0; the gradient of |x|^(1+eps)/(1+eps).
class HoelderMap {
public:
    explicit HoelderMap(double epsilon);

    double epsilon() const noexcept { return epsilon_; }
    void apply(std::span<const double> x, std::span<double> out) const noexcept;

private:
    double epsilon_;
};

std::vector<double> h_map(std::span<const double> x, double epsilon);

/// Rate that drives a gap of size gap0 to zero exactly after time s - r:
/// gap0^(1-eps) / ((s - r)(1 - eps)).
double gamma_s(double gap0, double epsilon, double s, double r);

/// Upper bound on |R(t)|^2 under the gap flow dR = -gamma H(R) dt:
/// (gap0^(1-eps) - gamma (1-eps) t)_+^(2/(1-eps)).
double coupling_bound(double gap0, double gamma, double epsilon, double t);

/// Pathwise bound on (1/2) int_0^T |zeta|^2:
/// gap0^2 / ((1 - eps^2)(s - r)) + L^2 s gap_sup^2.
double zeta_energy_bound(double gap0, double gap_sup, double s, double r, double epsilon, double lipschitz);

struct CouplingConfig {
    HoelderMap hoelder;
    double s;      ///< coupling deadline, in (r, T] and on the grid
    double gamma;  ///< gap contraction rate

    /// gamma = gamma_s for the initial gap of (x0, y0).
    static CouplingConfig for_deadline(double epsilon, double s, SegmentView x0, SegmentView y0);
};

/// Paired paths X and Y~ driven by the same increments.
struct CoupledTrajectory {
    TrajectoryHistory x;
    TrajectoryHistory y;
    /// First step k with R(t_k) == 0; from then on y equals x entry by entry.
    std::optional<std::uint64_t> coupling_step;
    /// |R(t_k)| for k = 0..steps.
    std::vector<double> r_values;
};

/// Per-path accumulators of sum <zeta_k, dW_k> and sum |zeta_k|^2 dt.
struct GirsanovLedger {
    double log_weight = 0.0;
    double energy = 0.0;

    void record(std::span<const double> zeta, std::span<const double> dw, double dt) noexcept;
};

/// log D = log_weight - energy / 2
double log_density(const GirsanovLedger& ledger) noexcept;

/// D = exp(log_weight - energy / 2). Throws DomainError when D overflows.
double density(const GirsanovLedger& ledger);

struct CoupledRun {
    CoupledTrajectory trajectory;
    GirsanovLedger ledger;
};

/// Simulates X from x0 and the auxiliary process Y~ from y0 with the same noise.
///
/// Each step applies the Euler update for v + Z(X_t) to Y~ and then the exact
/// gap flow |R| -> (|R|^(1-eps) - gamma (1-eps) dt)_+^(1/(1-eps)) along the
/// current gap direction. zeta_k is the realized per-step drift discrepancy,
///   zeta_k = -(realized gap displacement)/dt - (Z(X_{t_k}) - Z(Y~_{t_k})),
/// so that Y~_{k+1} = Y~_k + V(Y~_{t_k}) dt + (dW_k - zeta_k dt) holds exactly
/// and zeta_k depends only on information available at t_k.
CoupledRun simulate_coupled(const SolverConfig& config, const Segment& x0, const Segment& y0,
                            const CouplingConfig& coupling, const NoiseStream& noise);

}  // namespace sfde
