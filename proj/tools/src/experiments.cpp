// SPDX-License-Identifier: Apache-2.0
#include "sfde/harness/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "sfde/coupling.hpp"
#include "sfde/errors.hpp"
#include "sfde/harnack.hpp"
#include "sfde/parallel.hpp"
#include "sfde/stationary.hpp"
#include "sfde/stats.hpp"

namespace sfde::harness {

using nlohmann::json;

bool ExperimentResult::pass() const {
    if (error) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

McOptions mc_options(const ExperimentConfig& c) {
    return {c.monte_carlo.paths, c.monte_carlo.seed, c.monte_carlo.threads};
}

json estimate_json(const McEstimate& e, double z) {
    return {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}, {"lower", e.lower(z)}, {"upper", e.upper(z)}};
}

json interval_json(const Interval& i) { return {{"estimate", i.estimate}, {"lower", i.lower}, {"upper", i.upper}}; }

std::vector<Functional> functionals_of(const ExperimentConfig& c) {
    std::vector<Functional> out;
    for (const auto& d : c.functionals) out.push_back(build_functional(d));
    return out;
}

std::vector<SegmentFunctional> evals_of(const std::vector<Functional>& fs) {
    std::vector<SegmentFunctional> out;
    for (const auto& f : fs) out.push_back(f.eval);
    return out;
}

std::vector<DriftDescriptor> harnack_drifts(const ExperimentConfig& c) {
    return c.harnack.drifts.empty() ? std::vector<DriftDescriptor>{c.drift} : c.harnack.drifts;
}

/// At most ~256 evenly spaced steps, always including 0 and the last step.
std::vector<std::uint64_t> checkpoints(std::uint64_t steps) {
    const std::uint64_t stride = std::max<std::uint64_t>(1, steps / 256);
    std::vector<std::uint64_t> out;
    for (std::uint64_t k = 0; k <= steps; k += stride) out.push_back(k);
    if (out.back() != steps) out.push_back(steps);
    return out;
}

std::vector<std::string> indexed(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

template <typename F>
void as_config_error(const std::string& field, F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        throw ConfigError(field, std::nullopt, e.what());
    }
}

double deadline_for(const ExperimentConfig& c, const SolverConfig& cfg, const Segment& x0, const Segment& y0) {
    return c.coupling.s ? c.coupling.s->value() : default_deadline(cfg, x0.view(), y0.view());
}

Segment unit_direction(const ExperimentConfig& c, const TimeGrid& grid) {
    const auto raw = build_segment(c.strong_feller.direction, grid);
    const double n = sup_norm(raw.view());
    std::vector<double> v(raw.values().begin(), raw.values().end());
    for (auto& e : v) e /= n;
    return Segment(grid, std::move(v));
}

// ---- simulate ------------------------------------------------------------

ExperimentResult run_simulate(const ExperimentConfig& c, CsvWriter* paths) {
    const auto cfg = make_solver_config(c, c.drift.spec);
    const auto& grid = cfg.grid();
    const auto x0 = build_segment(c.x, grid);
    const auto fs = functionals_of(c);
    const auto mc = mc_options(c);
    const auto cps = checkpoints(cfg.steps());
    const double z = two_sided_z(c.monte_carlo.confidence);

    std::vector<std::vector<double>> values(fs.size(), std::vector<double>(mc.n_paths));
    std::vector<std::vector<double>> traj(cps.size(), std::vector<double>(mc.n_paths));
    parallel_for(mc.n_paths, mc.threads, [&](std::uint64_t p) {
        const auto h = simulate(cfg, x0, NoiseStream(mc.master_seed, p));
        const auto w = h.window(cfg.steps());
        for (std::size_t j = 0; j < fs.size(); ++j) values[j][p] = fs[j].eval(w);
        for (std::size_t i = 0; i < cps.size(); ++i) traj[i][p] = h.at_step(cps[i])[0];
    });

    ExperimentResult res;
    res.results["steps"] = cfg.steps();
    res.results["n_memory"] = grid.n_memory();
    bool finite = true;
    json rows = json::array();
    for (std::size_t j = 0; j < fs.size(); ++j) {
        const auto e = summarize(values[j]);
        finite = finite && std::isfinite(e.mean) && std::isfinite(e.std_error);
        rows.push_back({{"functional", fs[j].name}, {"estimate", estimate_json(e, z)}});
    }
    res.results["functionals"] = rows;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const auto e = summarize(traj[i]);
        res.plot.push_back({"mean_x0", static_cast<double>(cps[i]) * grid.dt(), e.mean, e.std_error});
    }
    res.checks.push_back({"estimates_finite", finite});

    if (paths) {
        const auto d = grid.dimension();
        paths->header(concat({"path", "step", "t"}, indexed("x_", d)));
        for (std::uint64_t p = 0; p < mc.n_paths; ++p) {
            const auto h = simulate(cfg, x0, NoiseStream(mc.master_seed, p));
            for (std::uint64_t k = 0; k <= h.steps(); ++k) {
                paths->cell(p).cell(k).cell(static_cast<double>(k) * grid.dt());
                for (double v : h.at_step(k)) paths->cell(v);
                paths->end_row();
            }
        }
    }
    return res;
}

// ---- couple --------------------------------------------------------------

struct CoupledSummary {
    bool coupled = false;
    bool identical_after = false;
    std::uint64_t coupling_step = 0;
    double decay_excess = -INFINITY;
    double half_energy = 0.0;
    double log_density = 0.0;
    std::vector<double> r_at;
};

ExperimentResult run_couple(const ExperimentConfig& c, CsvWriter* paths) {
    const auto cfg = make_solver_config(c, c.drift.spec);
    const auto& grid = cfg.grid();
    const auto x0 = build_segment(c.x, grid), y0 = build_segment(*c.y, grid);
    const double s = deadline_for(c, cfg, x0, y0);
    const auto coupling = CouplingConfig::for_deadline(c.coupling.epsilon, s, x0.view(), y0.view());
    const auto gap = segment_distance(x0.view(), y0.view());
    const double L = cfg.drift().lipschitz();
    const double r = grid.memory_length();
    const double dt = grid.dt();
    const double eps = coupling.hoelder.epsilon();
    const double lipschitz_slack = L * L * dt * gap.gap_sup * gap.gap_sup;
    const double decay_tol = 1e-8 + lipschitz_slack;
    const double energy_bound = zeta_energy_bound(gap.gap0, gap.gap_sup, s, r, eps, L);
    const auto deadline_step = grid.steps_for(s) - grid.n_memory() + 1;
    const auto mc = mc_options(c);
    const auto cps = checkpoints(cfg.steps());
    const double z = two_sided_z(c.monte_carlo.confidence);

    std::vector<CoupledSummary> per(mc.n_paths);
    parallel_for(mc.n_paths, mc.threads, [&](std::uint64_t p) {
        const auto run = simulate_coupled(cfg, x0, y0, coupling, NoiseStream(mc.master_seed, p));
        const auto& t = run.trajectory;
        auto& out = per[p];
        out.coupled = t.coupling_step.has_value();
        if (out.coupled) {
            out.coupling_step = *t.coupling_step;
            out.identical_after = true;
            for (auto k = out.coupling_step; k <= t.x.steps() && out.identical_after; ++k) {
                const auto a = t.x.at_step(k), b = t.y.at_step(k);
                out.identical_after = std::equal(a.begin(), a.end(), b.begin());
            }
        }
        for (std::size_t k = 0; k < t.r_values.size(); ++k) {
            const double bound = coupling_bound(gap.gap0, coupling.gamma, eps, static_cast<double>(k) * dt);
            out.decay_excess = std::max(out.decay_excess, t.r_values[k] * t.r_values[k] - bound);
        }
        out.half_energy = 0.5 * run.ledger.energy;
        out.log_density = log_density(run.ledger);
        for (auto k : cps) out.r_at.push_back(t.r_values[k]);
    });

    std::uint64_t coupled = 0, within = 0, identical = 0, max_step = 0;
    double decay_excess = -INFINITY, half_energy = 0.0;
    std::vector<double> density(mc.n_paths), density_sq(mc.n_paths);
    for (std::uint64_t p = 0; p < mc.n_paths; ++p) {
        const auto& s_p = per[p];
        if (s_p.coupled) {
            ++coupled;
            max_step = std::max(max_step, s_p.coupling_step);
            if (s_p.coupling_step <= deadline_step) ++within;
            if (s_p.identical_after) ++identical;
        }
        decay_excess = std::max(decay_excess, s_p.decay_excess);
        half_energy = std::max(half_energy, s_p.half_energy);
        density[p] = std::exp(s_p.log_density);
        density_sq[p] = std::exp(2.0 * s_p.log_density);
    }
    const auto d_est = summarize(density);
    const auto d2_est = summarize(density_sq);
    const double d2_bound = std::exp(2.0 * energy_bound);

    ExperimentResult res;
    auto& j = res.results;
    j["s"] = s;
    j["gamma"] = coupling.gamma;
    j["epsilon"] = eps;
    j["gap0"] = gap.gap0;
    j["gap_sup"] = gap.gap_sup;
    j["lipschitz"] = L;
    j["deadline_step"] = deadline_step;
    j["coupled_paths"] = coupled;
    j["coupled_by_deadline"] = within;
    j["identical_after_coupling"] = identical;
    j["max_coupling_step"] = max_step;
    j["max_coupling_time"] = static_cast<double>(max_step) * dt;
    j["decay"] = {{"max_excess", decay_excess}, {"tolerance", decay_tol}};
    j["energy"] = {{"max_half_energy", half_energy}, {"bound", energy_bound}, {"tolerance", lipschitz_slack}};
    j["density"] = estimate_json(d_est, z);
    j["density_second_moment"] = estimate_json(d2_est, z);
    j["density_second_moment_bound"] = d2_bound;

    res.checks.push_back({"coupled_by_deadline", within == mc.n_paths});
    res.checks.push_back({"identical_after_coupling", identical == mc.n_paths});
    res.checks.push_back({"decay_bound", decay_excess <= decay_tol});
    res.checks.push_back({"energy_bound", half_energy <= energy_bound * (1.0 + 1e-6) + lipschitz_slack});
    res.checks.push_back({"density_mean_one", std::abs(d_est.mean - 1.0) <= 3.0 * d_est.std_error});
    res.checks.push_back({"density_second_moment", d2_est.mean <= d2_bound + 3.0 * d2_est.std_error});

    for (std::size_t i = 0; i < cps.size(); ++i) {
        std::vector<double> col(mc.n_paths);
        for (std::uint64_t p = 0; p < mc.n_paths; ++p) col[p] = per[p].r_at[i];
        const auto e = summarize(col);
        res.plot.push_back({"R", static_cast<double>(cps[i]) * dt, e.mean, e.std_error});
    }
    for (auto k : cps) {
        const double t = static_cast<double>(k) * dt;
        res.plot.push_back({"bound", t, std::sqrt(coupling_bound(gap.gap0, coupling.gamma, eps, t)), 0.0});
    }

    if (paths) {
        const auto d = grid.dimension();
        paths->header(concat(concat({"path", "step", "t"}, indexed("x_", d)), concat(indexed("y_", d), {"R"})));
        for (std::uint64_t p = 0; p < mc.n_paths; ++p) {
            const auto run = simulate_coupled(cfg, x0, y0, coupling, NoiseStream(mc.master_seed, p));
            const auto& t = run.trajectory;
            for (std::uint64_t k = 0; k <= t.x.steps(); ++k) {
                paths->cell(p).cell(k).cell(static_cast<double>(k) * dt);
                for (double v : t.x.at_step(k)) paths->cell(v);
                for (double v : t.y.at_step(k)) paths->cell(v);
                paths->cell(t.r_values[k]).end_row();
            }
        }
    }
    return res;
}

// ---- harnack -------------------------------------------------------------

ExperimentResult run_harnack(const ExperimentConfig& c, CsvWriter* paths) {
    const auto fs = functionals_of(c);
    const auto evals = evals_of(fs);
    const auto mc = mc_options(c);
    const double conf = c.monte_carlo.confidence;
    const double z = two_sided_z(conf);

    ExperimentResult res;
    json rows = json::array(), drifts = json::array();
    std::uint64_t cross_ok = 0, cross_total = 0;
    if (paths) paths->header({"drift", "functional", "path", "direct_y", "direct_x", "weighted"});

    for (const auto& drift : harnack_drifts(c)) {
        const auto cfg = make_solver_config(c, drift.spec);
        const auto& grid = cfg.grid();
        const auto x0 = build_segment(c.x, grid), y0 = build_segment(*c.y, grid);
        const double s = deadline_for(c, cfg, x0, y0);
        const auto coupling = CouplingConfig::for_deadline(c.coupling.epsilon, s, x0.view(), y0.view());
        drifts.push_back({{"name", drift.name}, {"s", s}, {"gamma", coupling.gamma}, {"lipschitz", drift.spec.lipschitz()}});

        const auto reports = harnack_sweep(cfg, x0, y0, c.harnack.p, fs, coupling, mc, conf);
        for (const auto& rep : reports) {
            rows.push_back({{"drift", drift.name},
                            {"functional", rep.functional},
                            {"p", rep.p},
                            {"lhs", interval_json(rep.lhs)},
                            {"rhs", interval_json(rep.rhs)},
                            {"rhs_sharp", interval_json(rep.rhs_sharp)},
                            {"rho_sq", rep.rho_sq},
                            {"rho_sq_closed", rep.rho_sq_closed},
                            {"s", rep.s},
                            {"epsilon", rep.epsilon},
                            {"sharp_exponent", rep.sharp_exponent},
                            {"direct_y", estimate_json(rep.direct_y, z)},
                            {"direct_x_power", estimate_json(rep.direct_x_power, z)},
                            {"weighted_y", estimate_json(rep.weighted_y, z)},
                            {"cross_check_ok", rep.cross_check_ok},
                            {"pass", rep.pass}});
            const std::string tag = drift.name + "/" + rep.functional;
            res.checks.push_back({"harnack/" + tag + "/p=" + format_double(rep.p), rep.pass});
            res.plot.push_back({"lhs/" + tag, rep.p, rep.lhs.estimate, 0.5 * (rep.lhs.upper - rep.lhs.lower)});
            res.plot.push_back({"rhs/" + tag, rep.p, rep.rhs.estimate, 0.5 * (rep.rhs.upper - rep.rhs.lower)});
        }
        for (std::size_t j = 0; j < fs.size(); ++j) {
            ++cross_total;
            if (reports[j * c.harnack.p.size()].cross_check_ok) ++cross_ok;
        }

        if (paths) {
            const auto from_y = terminal_values(cfg, y0, evals, mc);
            const auto from_x = terminal_values(cfg, x0, evals, mc);
            const auto weighted = weighted_terminal_values(cfg, x0, y0, coupling, evals, mc);
            for (std::size_t j = 0; j < fs.size(); ++j)
                for (std::uint64_t p = 0; p < mc.n_paths; ++p)
                    paths->cell(drift.name).cell(fs[j].name).cell(p).cell(from_y[j][p]).cell(from_x[j][p])
                        .cell(weighted[j][p]).end_row();
        }
    }
    res.results["drifts"] = drifts;
    res.results["rows"] = rows;
    res.results["confidence"] = conf;
    res.results["slack"] = kHarnackSlack;
    res.results["cross_checks"] = {{"agree", cross_ok}, {"total", cross_total}};
    return res;
}

// ---- strong feller -------------------------------------------------------

ExperimentResult run_strong_feller(const ExperimentConfig& c, CsvWriter* paths) {
    const auto cfg = make_solver_config(c, c.drift.spec);
    const auto& grid = cfg.grid();
    const auto x0 = build_segment(c.x, grid);
    const auto dir = unit_direction(c, grid);
    const auto fs = functionals_of(c);
    const auto mc = mc_options(c);
    const double z = two_sided_z(c.monte_carlo.confidence);

    const auto rows = strong_feller_probe(cfg, x0, dir, c.strong_feller.deltas, fs, mc, c.coupling.epsilon);
    ExperimentResult res;
    json out = json::array();
    for (const auto& row : rows) {
        out.push_back({{"delta", row.delta},
                       {"functional", row.functional},
                       {"at_x", estimate_json(row.at_x, z)},
                       {"at_y", estimate_json(row.at_y, z)},
                       {"gap", row.gap},
                       {"gap_std_error", row.gap_std_error},
                       {"bound", row.bound},
                       {"bound_unsquared", row.bound_unsquared},
                       {"within_bound", row.within_bound}});
        res.checks.push_back({"feller/" + row.functional + "/delta=" + format_double(row.delta), row.within_bound});
        res.plot.push_back({"gap/" + row.functional, row.delta, row.gap, row.gap_std_error});
        res.plot.push_back({"bound/" + row.functional, row.delta, row.bound, 0.0});
        res.plot.push_back({"bound_unsquared/" + row.functional, row.delta, row.bound_unsquared, 0.0});
    }
    res.results["epsilon"] = c.coupling.epsilon;
    res.results["rows"] = out;

    if (paths) {
        paths->header({"delta", "functional", "path", "at_x", "at_y"});
        const auto evals = evals_of(fs);
        const auto at_x = terminal_values(cfg, x0, evals, mc);
        for (double delta : c.strong_feller.deltas) {
            std::vector<double> yv(x0.values().begin(), x0.values().end());
            for (std::size_t i = 0; i < yv.size(); ++i) yv[i] += delta * dir.values()[i];
            const auto at_y = terminal_values(cfg, Segment(grid, std::move(yv)), evals, mc);
            for (std::size_t j = 0; j < fs.size(); ++j)
                for (std::uint64_t p = 0; p < mc.n_paths; ++p)
                    paths->cell(delta).cell(fs[j].name).cell(p).cell(at_x[j][p]).cell(at_y[j][p]).end_row();
        }
    }
    return res;
}

OUExampleConfig ou_example(const ExperimentConfig& c) {
    return {c.drift.spec.dissipative.lambda0(), c.drift.spec.memory, c.stationary.moment_eps,
            c.stationary.lambda_target.value_or(0.0)};
}

// ---- stationary ----------------------------------------------------------

ExperimentResult run_stationary(const ExperimentConfig& c, CsvWriter* paths, SampleTable* samples_out) {
    const auto& st = c.stationary;
    const auto ex = ou_example(c);
    const auto cfg = make_solver_config(c, ex.drift());
    const auto& grid = cfg.grid();
    const auto x0 = build_segment(c.x, grid);
    const auto mc = mc_options(c);
    const double z = two_sided_z(c.monte_carlo.confidence);
    const double r = grid.memory_length();
    const double lambda0 = ex.lambda0;
    const bool no_memory = ex.memory.kind() == MemoryKind::Zero;

    ExperimentResult res;
    auto& j = res.results;

    const auto ic = integrability_condition(ex, r);
    j["integrability_condition"] = {{"threshold", ic.threshold},
                                    {"lambda_target", ex.lambda_target},
                                    {"target_above_threshold", ic.target_above_threshold},
                                    {"target_below_lambda0", ic.target_below_lambda0},
                                    {"lambda0_above_threshold", ic.lambda0_above_threshold}};
    res.checks.push_back({"integrability_condition", ic.holds()});

    // Exponential moments along the horizon.
    const auto table =
        exp_moment_estimate(cfg, x0, st.moment_eps, st.checkpoint_spacing.value(), mc, st.trend_confidence);
    json mrows = json::array();
    bool gaussian_ok = true;
    const auto init_now = x0.now();
    for (const auto& row : table.rows) {
        json mr = {{"t", row.t},
                   {"segment_moment", estimate_json(row.segment_moment, z)},
                   {"endpoint_moment", estimate_json(row.endpoint_moment, z)},
                   {"overflow_flags", row.overflow_flags},
                   {"running_max", row.running_max}};
        if (no_memory) {
            const double var = -std::expm1(-2.0 * lambda0 * row.t) / (2.0 * lambda0);
            const double decay = std::exp(-lambda0 * row.t);
            double mu2 = 0.0;
            for (double v : init_now) mu2 += v * decay * v * decay;
            const double denom = 1.0 - 2.0 * st.moment_eps * var;
            const double exact = std::pow(denom, -0.5 * static_cast<double>(grid.dimension())) *
                                 std::exp(st.moment_eps * mu2 / denom);
            mr["endpoint_closed_form"] = exact;
            gaussian_ok = gaussian_ok && std::abs(row.endpoint_moment.mean - exact) <=
                                             3.0 * row.endpoint_moment.std_error + 1e-12 * exact;
        }
        mrows.push_back(mr);
        res.plot.push_back({"moment", row.t, row.segment_moment.mean, row.segment_moment.std_error});
        res.plot.push_back({"endpoint_moment", row.t, row.endpoint_moment.mean, row.endpoint_moment.std_error});
        res.plot.push_back({"running_max", row.t, row.running_max, 0.0});
    }
    j["moments"] = {{"rows", mrows},
                    {"overflow_flags", table.overflow_flags},
                    {"trailing_slope", table.trailing_trend.slope},
                    {"trailing_slope_std_error", table.trailing_trend.slope_std_error},
                    {"upward_trend", table.upward_trend},
                    {"stabilized", table.stabilized}};
    res.checks.push_back({"moment_overflow_free", table.overflow_flags == 0});
    res.checks.push_back({"moment_no_upward_trend", !table.upward_trend});
    if (no_memory) res.checks.push_back({"endpoint_gaussian_moment", gaussian_ok});

    // Approximate invariant samples.
    const auto samples = stationary_sampler(cfg, x0, st.burn_in.value(), st.spacing.value(), st.samples, st.chains,
                                            splitmix64(mc.master_seed + 1), mc.threads);
    const auto diag = integrability_diagnostic(samples, ex.lambda_target);
    j["samples"] = {{"count", samples.size()}, {"chains", st.chains}};
    j["integrability_diagnostic"] = {{"lambda", ex.lambda_target},
                                     {"moment", estimate_json(diag.moment, z)},
                                     {"overflow_flags", diag.overflow_flags}};
    res.checks.push_back({"integrability_diagnostic_finite",
                          diag.overflow_flags == 0 && std::isfinite(diag.moment.mean)});
    if (no_memory) {
        const auto marginal = terminal_marginal(samples);
        const auto ks = ks_test_normal(marginal, 0.0, std::sqrt(1.0 / (2.0 * lambda0)));
        j["stationary_marginal_ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}};
        res.checks.push_back({"stationary_marginal_ks", ks.p_value > 0.01});
    }
    if (samples_out) {
        samples_out->t.clear();
        samples_out->values.clear();
        for (const auto& s : samples) {
            samples_out->t.push_back(s.t);
            samples_out->values.emplace_back(s.segment.values().begin(), s.segment.values().end());
        }
    }

    // Variation-of-constants residual under refinement.
    if (!st.identity_dts.empty()) {
        const auto finest = *std::min_element(st.identity_dts.begin(), st.identity_dts.end(),
                                              [](const ExactValue& a, const ExactValue& b) { return a.value() < b.value(); });
        std::vector<double> dts, means;
        json irows = json::array();
        const auto seed = splitmix64(mc.master_seed + 2);
        for (const auto& dtv : st.identity_dts) {
            const TimeGrid g(dtv.value(), *c.r.multiple_of(dtv), grid.dimension());
            const SolverConfig sc(g, c.horizon.value(), ex.drift());
            const auto init = build_segment(c.x, g);
            const auto ratio = *dtv.multiple_of(finest);
            std::vector<double> resid(st.identity_paths);
            parallel_for(st.identity_paths, mc.threads, [&](std::uint64_t p) {
                const AggregatedIncrements inc(NoiseStream(seed, p), ratio, finest.value());
                const auto h = simulate_with(sc, init, inc);
                resid[p] = ou_identity_residual(sc, h, inc);
            });
            const auto e = summarize(resid);
            dts.push_back(dtv.value());
            means.push_back(e.mean);
            irows.push_back({{"dt", dtv.text}, {"residual", estimate_json(e, z)}});
            res.plot.push_back({"identity_residual", dtv.value(), e.mean, e.std_error});
        }
        j["identity_residual"] = {{"rows", irows}};
        if (dts.size() >= 2) {
            const double slope = loglog_slope(dts, means);
            j["identity_residual"]["loglog_slope"] = slope;
            res.checks.push_back({"identity_residual_slope", slope >= 0.8 && slope <= 1.2});
        }
    }

    if (st.hyperbounded) {
        const auto& hb = *st.hyperbounded;
        const SolverConfig hc(grid, hb.horizon.value(), ex.drift());
        const auto n = std::min<std::size_t>(hb.samples, samples.size());
        const std::span<const SampledSegment> subset(samples.data(), n);
        const auto fs = functionals_of(c);
        const auto rows = hyperbounded_diagnostic(hc, subset, fs, {hb.inner_paths, splitmix64(mc.master_seed + 3), mc.threads});
        json hrows = json::array();
        bool finite = true;
        for (const auto& row : rows) {
            hrows.push_back({{"functional", row.functional},
                             {"l4_norm_of_semigroup", row.l4_norm_of_semigroup},
                             {"l2_norm", row.l2_norm},
                             {"ratio", row.ratio}});
            finite = finite && std::isfinite(row.ratio);
        }
        j["hyperbounded"] = {{"horizon", hb.horizon.value()}, {"samples", n}, {"rows", hrows}};
        res.checks.push_back({"hyperbounded_ratios_finite", finite});
    }

    if (paths) {
        const auto stride = grid.steps_for(st.checkpoint_spacing.value());
        paths->header(concat({"path", "t", "sup_norm"}, indexed("x_", grid.dimension())));
        for (std::uint64_t p = 0; p < mc.n_paths; ++p) {
            const auto h = simulate(cfg, x0, NoiseStream(mc.master_seed, p));
            for (std::uint64_t k = 0; k <= h.steps(); k += stride) {
                paths->cell(p).cell(static_cast<double>(k) * grid.dt()).cell(sup_norm(h.window(k)));
                for (double v : h.at_step(k)) paths->cell(v);
                paths->end_row();
            }
        }
    }
    return res;
}

}  // namespace

void validate_experiment(const ExperimentConfig& c) {
    TimeGrid grid(1.0, 1, 1);
    as_config_error("grid", [&] { grid = make_grid(c); });
    as_config_error("grid.horizon", [&] { (void)make_solver_config(c, c.drift.spec); });
    const double r = grid.memory_length();
    const double T = c.horizon.value();
    const bool t_above_r = *c.horizon.multiple_of(c.dt) > *c.r.multiple_of(c.dt);

    const auto require_y = [&] {
        if (!c.y) throw ConfigError("initial.y", std::nullopt, "this experiment needs a second initial segment");
    };
    const auto check_deadline = [&] {
        if (!c.coupling.s) return;
        const double s = c.coupling.s->value();
        if (!(s > r)) throw ConfigError("coupling.s", std::nullopt, "coupling deadline s must exceed the memory length r");
        if (s > T * (1.0 + 1e-12)) throw ConfigError("coupling.s", std::nullopt, "coupling deadline s must not exceed the horizon T");
    };

    switch (c.experiment) {
        case ExperimentKind::Simulate: break;
        case ExperimentKind::Couple:
            require_y();
            if (!t_above_r)
                throw ConfigError("grid.horizon", std::nullopt, "coupling needs horizon T > memory length r");
            check_deadline();
            break;
        case ExperimentKind::Harnack:
            require_y();
            if (!t_above_r)
                throw ConfigError("grid.horizon", std::nullopt, "Harnack inequality requires horizon T > memory length r");
            check_deadline();
            for (const auto& d : c.functionals)
                if (!build_functional(d).nonnegative)
                    throw ConfigError("functionals", std::nullopt, "Harnack check needs nonnegative functionals");
            for (std::size_t i = 0; i < c.harnack.drifts.size(); ++i)
                as_config_error("harnack.drifts[" + std::to_string(i) + "]",
                                [&] { (void)make_solver_config(c, c.harnack.drifts[i].spec); });
            break;
        case ExperimentKind::StrongFeller:
            if (!t_above_r)
                throw ConfigError("grid.horizon", std::nullopt, "strong Feller bound requires horizon T > memory length r");
            break;
        case ExperimentKind::Stationary: {
            const auto& st = c.stationary;
            if (c.drift.spec.dissipative.kind() != DissipativeKind::Linear)
                throw ConfigError("drift.dissipative", std::nullopt, "stationary experiment needs the linear dissipative field");
            if (!st.lambda_target) throw ConfigError("stationary.lambda_target", std::nullopt, "missing required field");
            as_config_error("stationary", [&] { ou_example(c).validate(); });
            if (!(st.checkpoint_spacing.num > 0))
                throw ConfigError("stationary.checkpoint_spacing", std::nullopt, "must be > 0");
            if (!(st.spacing.num > 0) || st.spacing.value() < r)
                throw ConfigError("stationary.spacing", std::nullopt, "samples must be at least r apart");
            if (st.samples == 0) throw ConfigError("stationary.samples", std::nullopt, "must be >= 1");
            if (st.chains == 0) throw ConfigError("stationary.chains", std::nullopt, "must be >= 1");
            if (!st.identity_dts.empty()) {
                const auto finest = *std::min_element(st.identity_dts.begin(), st.identity_dts.end(),
                    [](const ExactValue& a, const ExactValue& b) { return a.value() < b.value(); });
                for (const auto& v : st.identity_dts) {
                    if (!v.multiple_of(finest))
                        throw ConfigError("stationary.identity_dts", std::nullopt,
                                          "every step size must be an integer multiple of the smallest");
                    if (!c.horizon.multiple_of(v))
                        throw ConfigError("stationary.identity_dts", std::nullopt, "horizon must be a multiple of " + v.text);
                }
                if (st.identity_paths == 0) throw ConfigError("stationary.identity_paths", std::nullopt, "must be >= 1");
            }
            if (st.hyperbounded) {
                const double L = c.drift.spec.lipschitz();
                if (!(L > 0.0))
                    throw ConfigError("drift.memory", std::nullopt, "hyperbounded diagnostic requires a memory term with L > 0");
                if (!(st.hyperbounded->horizon.value() > r + 1.0 / L))
                    throw ConfigError("stationary.hyperbounded.horizon", std::nullopt,
                                      "hyperbounded diagnostic requires T > r + 1/L");
                if (st.hyperbounded->samples == 0)
                    throw ConfigError("stationary.hyperbounded.samples", std::nullopt, "must be >= 1");
            }
            break;
        }
    }
}

ExperimentResult run_experiment(const ExperimentConfig& c, CsvWriter* paths, SampleTable* samples) {
    validate_experiment(c);
    try {
        switch (c.experiment) {
            case ExperimentKind::Simulate: return run_simulate(c, paths);
            case ExperimentKind::Couple: return run_couple(c, paths);
            case ExperimentKind::Harnack: return run_harnack(c, paths);
            case ExperimentKind::StrongFeller: return run_strong_feller(c, paths);
            case ExperimentKind::Stationary: return run_stationary(c, paths, samples);
        }
    } catch (const DivergenceError& e) {
        ExperimentResult res;
        res.error = e.what();
        return res;
    } catch (const ContractError& e) {
        ExperimentResult res;
        res.error = e.what();
        return res;
    }
    return {};
}

}  // namespace sfde::harness
