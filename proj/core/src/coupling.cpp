// SPDX-License-Identifier: Apache-2.0
#include "sfde/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "sfde/errors.hpp"

namespace sfde {

namespace {

void require_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("Hoelder exponent must lie in (0, 1)");
}

void require_deadline(double s, double r) {
    if (!(s > r)) throw DomainError("coupling deadline s must exceed the memory length r");
}

}  // namespace

HoelderMap::HoelderMap(double epsilon) : epsilon_(epsilon) { require_epsilon(epsilon); }

void HoelderMap::apply(std::span<const double> x, std::span<double> out) const noexcept {
    const double n = euclidean_norm(x);
    if (n == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double scale = std::pow(n, epsilon_ - 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale;
}

std::vector<double> h_map(std::span<const double> x, double epsilon) {
    std::vector<double> out(x.size());
    HoelderMap(epsilon).apply(x, out);
    return out;
}

double gamma_s(double gap0, double epsilon, double s, double r) {
    require_epsilon(epsilon);
    require_deadline(s, r);
    if (gap0 == 0.0) return 0.0;
    return std::pow(gap0, 1.0 - epsilon) / ((s - r) * (1.0 - epsilon));
}

double coupling_bound(double gap0, double gamma, double epsilon, double t) {
    require_epsilon(epsilon);
    if (t < 0.0) throw DomainError("coupling_bound: t must be >= 0");
    const double base = std::pow(gap0, 1.0 - epsilon) - gamma * (1.0 - epsilon) * t;
    if (base <= 0.0) return 0.0;
    return std::pow(base, 2.0 / (1.0 - epsilon));
}

double zeta_energy_bound(double gap0, double gap_sup, double s, double r, double epsilon, double lipschitz) {
    require_epsilon(epsilon);
    require_deadline(s, r);
    return gap0 * gap0 / ((1.0 - epsilon * epsilon) * (s - r)) + lipschitz * lipschitz * s * gap_sup * gap_sup;
}

CouplingConfig CouplingConfig::for_deadline(double epsilon, double s, SegmentView x0, SegmentView y0) {
    const double r = x0.grid().memory_length();
    const auto gap = segment_distance(x0, y0);
    return {HoelderMap(epsilon), s, gamma_s(gap.gap0, epsilon, s, r)};
}

void GirsanovLedger::record(std::span<const double> zeta, std::span<const double> dw, double dt) noexcept {
    log_weight += dot(zeta, dw);
    energy += dot(zeta, zeta) * dt;
}

double log_density(const GirsanovLedger& ledger) noexcept { return ledger.log_weight - 0.5 * ledger.energy; }

double density(const GirsanovLedger& ledger) {
    const double d = std::exp(log_density(ledger));
    if (!std::isfinite(d)) throw DomainError("density overflows double range; use log_density");
    return d;
}

CoupledRun simulate_coupled(const SolverConfig& config, const Segment& x0, const Segment& y0,
                            const CouplingConfig& coupling, const NoiseStream& noise) {
    const auto& grid = config.grid();
    if (!(x0.grid() == grid) || !(y0.grid() == grid))
        throw IncompatibleGridError("simulate_coupled: initial segments are on another grid");
    require_deadline(coupling.s, grid.memory_length());
    if (!grid.is_aligned(coupling.s)) throw GridAlignmentError("simulate_coupled: deadline s is not on the grid");
    if (coupling.s > config.horizon() * (1.0 + 1e-12))
        throw DomainError("simulate_coupled: deadline s exceeds the horizon T");
    if (!(coupling.gamma >= 0.0)) throw DomainError("simulate_coupled: gamma must be >= 0");

    const auto d = grid.dimension();
    const double dt = grid.dt();
    const double one_minus_eps = 1.0 - coupling.hoelder.epsilon();
    const double flow_decrement = coupling.gamma * one_minus_eps * dt;
    const auto n_memory = grid.n_memory();

    CoupledRun run{{TrajectoryHistory(x0), TrajectoryHistory(y0), std::nullopt, {}}, {}};
    auto& traj = run.trajectory;
    traj.x.reserve_steps(config.steps());
    traj.y.reserve_steps(config.steps());
    traj.r_values.reserve(config.steps() + 1);

    std::vector<double> dw(d), vx(d), x_next(d), y_next(d), gap(d), zeta(d), zx(d), zy(d), vy(d);

    const auto gap_norm = [&](std::span<const double> a, std::span<const double> b) {
        for (std::size_t i = 0; i < d; ++i) gap[i] = a[i] - b[i];
        return euclidean_norm(gap);
    };

    const double gap0 = gap_norm(x0.now(), y0.now());
    traj.r_values.push_back(gap0);
    if (gap0 == 0.0) traj.coupling_step = 0;

    for (std::uint64_t k = 0; k < config.steps(); ++k) {
        const auto xs = traj.x.window(k);
        const auto ys = traj.y.window(k);
        noise.increment(k, dt, dw);

        // X follows the original equation.
        config.drift().memory.eval(xs, zx);
        detail::euler_step(config.drift(), xs, dw, dt, vx, x_next);
        detail::check_state(x_next, k + 1);

        // Segments of X and Y~ agree once n_memory steps have passed since coupling.
        const bool segments_equal = traj.coupling_step && k >= *traj.coupling_step + n_memory;
        if (segments_equal) {
            std::copy(zx.begin(), zx.end(), zy.begin());
        } else {
            config.drift().memory.eval(ys, zy);
        }

        std::fill(zeta.begin(), zeta.end(), 0.0);
        if (traj.coupling_step) {
            std::copy(x_next.begin(), x_next.end(), y_next.begin());
        } else {
            // Euler substep for v(Y~) + Z(X_t).
            const auto y_now = ys.now();
            config.drift().dissipative.eval(y_now, vy);
            for (std::size_t i = 0; i < d; ++i) y_next[i] = y_now[i] + (vy[i] + zx[i]) * dt + dw[i];

            // Exact gap flow along the current gap direction.
            const double before = gap_norm(x_next, y_next);
            double after = 0.0;
            if (before > 0.0) {
                const double base = std::pow(before, one_minus_eps) - flow_decrement;
                after = base > 0.0 ? std::pow(base, 1.0 / one_minus_eps) : 0.0;
            }
            if (before > 0.0) {
                // Y~ moves by (before - after) toward X; zeta carries minus that per unit time.
                const double shrink = (before - after) / before;
                for (std::size_t i = 0; i < d; ++i) zeta[i] = -shrink * gap[i] / dt;
            }
            if (after == 0.0) {
                std::copy(x_next.begin(), x_next.end(), y_next.begin());
                traj.coupling_step = k + 1;
            } else {
                const double keep = after / before;
                for (std::size_t i = 0; i < d; ++i) y_next[i] = x_next[i] - keep * gap[i];
            }
        }
        for (std::size_t i = 0; i < d; ++i) zeta[i] -= zx[i] - zy[i];

        detail::check_state(y_next, k + 1);
        run.ledger.record(zeta, dw, dt);
        traj.x.append(x_next);
        traj.y.append(y_next);
        traj.r_values.push_back(gap_norm(x_next, y_next));
    }
    return run;
}

}  // namespace sfde
