// SPDX-License-Identifier: Apache-2.0
#include "sfde/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sfde/errors.hpp"

namespace sfde {

namespace {

void require_horizon(double r, double T) {
    if (!(T > r)) throw DomainError("Harnack inequality requires horizon T > memory length r");
}

void require_gaps(double gap0, double gap_sup) {
    if (!(gap0 >= 0.0) || !(gap_sup >= 0.0)) throw DomainError("segment gaps must be >= 0");
}

Interval power_interval(const McEstimate& e, double z, double p) {
    return {std::pow(std::max(e.mean, 0.0), p), std::pow(std::max(e.lower(z), 0.0), p),
            std::pow(std::max(e.upper(z), 0.0), p)};
}

Interval scaled_interval(const McEstimate& e, double z, double factor) {
    return {e.mean * factor, std::max(e.lower(z), 0.0) * factor, e.upper(z) * factor};
}

}  // namespace

double rho_objective(double s, double gap0, double gap_sup, double lipschitz, double r) {
    const double lg = lipschitz * gap_sup;
    return gap0 * gap0 / (s - r) + s * lg * lg;
}

double rho_sq_minimizer(double gap0, double gap_sup, double lipschitz, double r, double T) {
    require_horizon(r, T);
    require_gaps(gap0, gap_sup);
    if (gap0 == 0.0) return r;
    if (lipschitz * gap_sup == 0.0) return T;

    const auto f = [&](double s) { return rho_objective(s, gap0, gap_sup, lipschitz, r); };
    const double inv_phi = 1.0 / std::numbers::phi;
    double a = r;
    double b = T;
    double c = b - (b - a) * inv_phi;
    double d = a + (b - a) * inv_phi;
    double fc = f(c);
    double fd = f(d);
    while (b - a > 1e-12 * std::max(1.0, std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    const double s = 0.5 * (a + b);
    return f(T) <= f(s) ? T : s;
}

double rho_sq_variational(double gap0, double gap_sup, double lipschitz, double r, double T) {
    const double s = rho_sq_minimizer(gap0, gap_sup, lipschitz, r, T);
    if (gap0 == 0.0) {
        const double lg = lipschitz * gap_sup;
        return r * lg * lg;
    }
    return rho_objective(s, gap0, gap_sup, lipschitz, r);
}

double rho_sq_closed_form(double gap0, double gap_sup, double lipschitz, double r, double T) {
    require_horizon(r, T);
    require_gaps(gap0, gap_sup);
    if (gap0 > gap_sup * (1.0 + 1e-12))
        throw ContractError("rho_sq_closed_form: |x(0) - y(0)| cannot exceed ||x - y||");
    if (gap_sup == 0.0) return 0.0;
    const double lg = lipschitz * gap_sup;
    if (lg == 0.0) return gap0 * gap0 / (T - r);
    const double threshold = r + gap0 / lg;
    if (T <= threshold) return gap0 * gap0 / (T - r) + T * lg * lg;
    return 2.0 * gap0 * lg + r * lg * lg;
}

double tv_bound(double gap0, double gap_sup, double lipschitz, double r, double T, double epsilon) {
    require_horizon(r, T);
    require_gaps(gap0, gap_sup);
    const double exponent = zeta_energy_bound(gap0, gap_sup, T, r, epsilon, lipschitz);
    return std::sqrt(std::expm1(2.0 * exponent));
}

double tv_bound_unsquared_gap(double gap0, double gap_sup, double lipschitz, double r, double T, double epsilon) {
    require_horizon(r, T);
    require_gaps(gap0, gap_sup);
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("Hoelder exponent must lie in (0, 1)");
    const double lg = lipschitz * gap_sup;
    const double exponent = gap0 / ((T - r) * (1.0 - epsilon * epsilon)) + T * lg * lg;
    return std::sqrt(std::expm1(2.0 * exponent));
}

double default_deadline(const SolverConfig& config, SegmentView x0, SegmentView y0) {
    const auto& grid = config.grid();
    const double r = grid.memory_length();
    const double T = config.horizon();
    require_horizon(r, T);
    const auto gap = segment_distance(x0, y0);
    const double L = config.drift().lipschitz();
    const double s_star = rho_sq_minimizer(gap.gap0, gap.gap_sup, L, r, T);

    const auto first = grid.n_memory() + 1;
    const auto last = config.steps();
    const auto lo = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::floor(s_star / grid.dt())), first, last);
    const auto hi = std::clamp<std::uint64_t>(lo + 1, first, last);
    const auto cost = [&](std::uint64_t k) {
        return rho_objective(static_cast<double>(k) * grid.dt(), gap.gap0, gap.gap_sup, L, r);
    };
    const auto best = cost(hi) < cost(lo) ? hi : lo;
    return static_cast<double>(best) * grid.dt();
}

std::vector<std::vector<double>> weighted_terminal_values(const SolverConfig& config, const Segment& x0,
                                                          const Segment& y0, const CouplingConfig& coupling,
                                                          std::span<const SegmentFunctional> functionals,
                                                          const McOptions& mc) {
    const auto& grid = config.grid();
    const double deadline_steps = (coupling.s - grid.memory_length()) / grid.dt() + 1.0;
    std::vector<std::vector<double>> out(functionals.size(), std::vector<double>(mc.n_paths));
    parallel_for(mc.n_paths, mc.threads, [&](std::uint64_t p) {
        CoupledRun run = [&] {
            try {
                return simulate_coupled(config, x0, y0, coupling, NoiseStream(mc.master_seed, p));
            } catch (const DivergenceError& e) {
                throw DivergenceError(e.step(), p, std::string(e.what()) + " on path " + std::to_string(p));
            }
        }();
        const auto& step = run.trajectory.coupling_step;
        if (!step || static_cast<double>(*step) > deadline_steps + 1e-9)
            throw ContractError("coupled path " + std::to_string(p) + " did not close by the deadline s");
        const double weight = density(run.ledger);
        const auto terminal = run.trajectory.x.window(run.trajectory.x.steps());
        for (std::size_t j = 0; j < functionals.size(); ++j) out[j][p] = weight * functionals[j](terminal);
    });
    return out;
}

McEstimate estimate_pTf_weighted(const SolverConfig& config, const Segment& x0, const Segment& y0,
                                 const CouplingConfig& coupling, const SegmentFunctional& f, const McOptions& mc) {
    return summarize(
        weighted_terminal_values(config, x0, y0, coupling, std::span<const SegmentFunctional>(&f, 1), mc).front());
}

std::vector<HarnackReport> harnack_sweep(const SolverConfig& config, const Segment& x0, const Segment& y0,
                                         std::span<const double> ps, std::span<const Functional> functionals,
                                         const CouplingConfig& coupling, const McOptions& mc, double confidence) {
    const double r = config.grid().memory_length();
    const double T = config.horizon();
    require_horizon(r, T);
    for (double p : ps)
        if (!(p > 1.0)) throw DomainError("Harnack exponent p must be > 1");
    for (const auto& f : functionals)
        if (!f.nonnegative) throw ContractError("Harnack check needs nonnegative functionals: " + f.name);

    std::vector<SegmentFunctional> evals;
    for (const auto& f : functionals) evals.push_back(f.eval);

    const auto from_y = terminal_values(config, y0, evals, mc);
    const auto from_x = terminal_values(config, x0, evals, mc);
    const auto weighted = weighted_terminal_values(config, x0, y0, coupling, evals, mc);

    const auto gap = segment_distance(x0, y0);
    const double L = config.drift().lipschitz();
    const double rho = rho_sq_variational(gap.gap0, gap.gap_sup, L, r, T);
    const double rho_closed = rho_sq_closed_form(gap.gap0, gap.gap_sup, L, r, T);
    const double eps = coupling.hoelder.epsilon();
    const double sharp = zeta_energy_bound(gap.gap0, gap.gap_sup, coupling.s, r, eps, L);
    const double z = two_sided_z(confidence);

    std::vector<HarnackReport> reports;
    for (std::size_t j = 0; j < functionals.size(); ++j) {
        const auto direct_y = summarize(from_y[j]);
        const auto weighted_y = summarize(weighted[j]);
        const double combined = std::hypot(direct_y.std_error, weighted_y.std_error);
        for (double p : ps) {
            std::vector<double> powered(from_x[j].size());
            std::transform(from_x[j].begin(), from_x[j].end(), powered.begin(),
                           [p](double v) { return std::pow(v, p); });
            const auto direct_xp = summarize(powered);
            const double q = p / (p - 1.0);

            HarnackReport rep;
            rep.p = p;
            rep.functional = functionals[j].name;
            rep.confidence = confidence;
            rep.rho_sq = rho;
            rep.rho_sq_closed = rho_closed;
            rep.s = coupling.s;
            rep.epsilon = eps;
            rep.sharp_exponent = q * sharp;
            rep.direct_y = direct_y;
            rep.direct_x_power = direct_xp;
            rep.weighted_y = weighted_y;
            rep.lhs = power_interval(direct_y, z, p);
            rep.rhs = scaled_interval(direct_xp, z, std::exp(q * rho));
            rep.rhs_sharp = scaled_interval(direct_xp, z, std::exp(rep.sharp_exponent));
            rep.cross_check_ok = std::abs(weighted_y.mean - direct_y.mean) <= 3.0 * combined;
            rep.pass = rep.lhs.upper <= rep.rhs.lower * (1.0 + kHarnackSlack);
            reports.push_back(std::move(rep));
        }
    }
    return reports;
}

HarnackReport harnack_check(const HarnackParams& params, const CouplingConfig& coupling, const McOptions& mc,
                            double confidence) {
    return harnack_sweep(params.config, params.x0, params.y0, std::span<const double>(&params.p, 1),
                         std::span<const Functional>(&params.f, 1), coupling, mc, confidence)
        .front();
}

std::vector<FellerRow> strong_feller_probe(const SolverConfig& config, const Segment& x0, const Segment& direction,
                                           std::span<const double> deltas, std::span<const Functional> functionals,
                                           const McOptions& mc, double epsilon) {
    const auto& grid = config.grid();
    const double r = grid.memory_length();
    const double T = config.horizon();
    require_horizon(r, T);
    if (!(direction.grid() == grid)) throw IncompatibleGridError("strong_feller_probe: direction is on another grid");

    std::vector<SegmentFunctional> evals;
    for (const auto& f : functionals) evals.push_back(f.eval);
    const auto at_x = terminal_values(config, x0, evals, mc);
    const double L = config.drift().lipschitz();

    std::vector<FellerRow> rows;
    for (double delta : deltas) {
        std::vector<double> yv(x0.values().begin(), x0.values().end());
        for (std::size_t i = 0; i < yv.size(); ++i) yv[i] += delta * direction.values()[i];
        const Segment y0(grid, std::move(yv));
        const auto at_y = terminal_values(config, y0, evals, mc);
        const auto gap = segment_distance(x0, y0);
        const double tv = tv_bound(gap.gap0, gap.gap_sup, L, r, T, epsilon);
        const double tv_unsq = tv_bound_unsquared_gap(gap.gap0, gap.gap_sup, L, r, T, epsilon);
        for (std::size_t j = 0; j < functionals.size(); ++j) {
            std::vector<double> diff(mc.n_paths);
            for (std::uint64_t p = 0; p < mc.n_paths; ++p) diff[p] = at_x[j][p] - at_y[j][p];
            const auto d = summarize(diff);
            FellerRow row;
            row.delta = delta;
            row.functional = functionals[j].name;
            row.at_x = summarize(at_x[j]);
            row.at_y = summarize(at_y[j]);
            row.gap = std::abs(d.mean);
            row.gap_std_error = d.std_error;
            row.bound = functionals[j].sup_bound * tv;
            row.bound_unsquared = functionals[j].sup_bound * tv_unsq;
            row.within_bound = row.gap <= row.bound + 3.0 * row.gap_std_error;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace sfde
