// SPDX-License-Identifier: Apache-2.0
#include "sfde/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "sfde/errors.hpp"

namespace sfde {

void OUExampleConfig::validate() const {
    if (!(lambda0 > 0.0)) throw DomainError("OU example: lambda0 must be > 0");
    if (!(moment_eps >= 0.0)) throw DomainError("OU example: moment exponent must be >= 0");
    if (!(moment_eps < lambda0)) throw DomainError("OU example: moment exponent must be below lambda0");
    if (!memory.declared_bound()) throw DomainError("OU example: memory functional must be bounded");
}

IntegrabilityCondition integrability_condition(const OUExampleConfig& config, double r) {
    const double L = config.memory.declared_lipschitz();
    IntegrabilityCondition c;
    c.threshold = 4.0 * (2.0 * L + r * L * L);
    c.target_above_threshold = config.lambda_target > c.threshold;
    c.target_below_lambda0 = config.lambda_target < config.lambda0;
    c.lambda0_above_threshold = config.lambda0 > c.threshold;
    return c;
}

namespace {

// e^{eps n2} with the exponent capped; returns whether the cap was hit.
bool capped_exp(double eps, double n2, double& out) {
    const double e = eps * n2;
    if (e > kMomentExponentCap) {
        out = std::exp(kMomentExponentCap);
        return true;
    }
    out = std::exp(e);
    return false;
}

}  // namespace

MomentTable exp_moment_estimate(const SolverConfig& config, const Segment& initial, double moment_eps,
                                double checkpoint_spacing, const McOptions& mc, double trend_confidence) {
    if (!(moment_eps >= 0.0)) throw DomainError("exp_moment_estimate: exponent must be >= 0");
    if (!(checkpoint_spacing > 0.0)) throw DomainError("exp_moment_estimate: checkpoint spacing must be > 0");
    const auto& grid = config.grid();
    const auto stride = grid.steps_for(checkpoint_spacing);
    const auto n_checkpoints = config.steps() / stride + 1;

    std::vector<std::vector<double>> seg(n_checkpoints, std::vector<double>(mc.n_paths));
    std::vector<std::vector<double>> end(n_checkpoints, std::vector<double>(mc.n_paths));
    std::vector<std::vector<unsigned char>> flags(n_checkpoints, std::vector<unsigned char>(mc.n_paths, 0));

    parallel_for(mc.n_paths, mc.threads, [&](std::uint64_t p) {
        const auto h = simulate(config, initial, NoiseStream(mc.master_seed, p));
        for (std::uint64_t c = 0; c < n_checkpoints; ++c) {
            const auto w = h.window(c * stride);
            const double s = sup_norm(w);
            const double e = euclidean_norm(w.now());
            bool flagged = capped_exp(moment_eps, s * s, seg[c][p]);
            flagged = capped_exp(moment_eps, e * e, end[c][p]) || flagged;
            flags[c][p] = flagged ? 1 : 0;
        }
    });

    MomentTable table;
    double running = 0.0;
    for (std::uint64_t c = 0; c < n_checkpoints; ++c) {
        MomentRow row;
        row.t = static_cast<double>(c * stride) * grid.dt();
        row.segment_moment = summarize(seg[c]);
        row.endpoint_moment = summarize(end[c]);
        row.overflow_flags = static_cast<std::uint64_t>(std::count(flags[c].begin(), flags[c].end(), 1));
        running = std::max(running, row.segment_moment.mean);
        row.running_max = running;
        table.overflow_flags += row.overflow_flags;
        table.rows.push_back(row);
    }

    const auto half = n_checkpoints / 2;
    if (n_checkpoints - half >= 3) {
        std::vector<double> ts, ms;
        for (auto c = half; c < n_checkpoints; ++c) {
            ts.push_back(table.rows[c].t);
            ms.push_back(table.rows[c].segment_moment.mean);
        }
        table.trailing_trend = fit_line(ts, ms);
        const double z = normal_quantile(trend_confidence);
        const auto& fit = table.trailing_trend;
        table.upward_trend = fit.slope_std_error > 0.0 ? fit.slope > z * fit.slope_std_error : fit.slope > 0.0;
    }
    table.stabilized = !table.upward_trend && table.overflow_flags == 0;
    return table;
}

std::vector<SampledSegment> stationary_sampler(const SolverConfig& config, const Segment& initial, double burn_in,
                                               double spacing, std::uint64_t n_samples, std::uint64_t n_chains,
                                               std::uint64_t master_seed, unsigned threads) {
    const auto& grid = config.grid();
    if (!(spacing > 0.0)) throw DomainError("stationary_sampler: spacing must be > 0");
    if (spacing < grid.memory_length() * (1.0 - 1e-12))
        throw DomainError("stationary_sampler: samples must be at least r apart");
    if (n_chains < 1) throw DomainError("stationary_sampler: need at least one chain");
    const auto burn_steps = grid.steps_for(burn_in);
    const auto stride = grid.steps_for(spacing);
    const auto per_chain = (n_samples + n_chains - 1) / n_chains;

    std::vector<std::vector<SampledSegment>> chains(n_chains);
    parallel_for(n_chains, threads, [&](std::uint64_t c) {
        const auto first = c * per_chain;
        if (first >= n_samples) return;
        const auto count = std::min(per_chain, n_samples - first);
        const auto total_steps = burn_steps + (count - 1) * stride;
        if (total_steps == 0) {
            chains[c].push_back({0.0, c, initial});
            return;
        }
        const auto chain_config = config.with_horizon(static_cast<double>(total_steps) * grid.dt());
        const auto h = simulate(chain_config, initial, NoiseStream(master_seed, c));
        for (std::uint64_t j = 0; j < count; ++j) {
            const auto k = burn_steps + j * stride;
            const auto w = h.window(k);
            chains[c].push_back({static_cast<double>(k) * grid.dt(), c,
                                 Segment(grid, std::vector<double>(w.data().begin(), w.data().end()))});
        }
    });

    std::vector<SampledSegment> out;
    out.reserve(n_samples);
    for (auto& chain : chains)
        for (auto& s : chain) out.push_back(std::move(s));
    return out;
}

std::vector<double> terminal_marginal(std::span<const SampledSegment> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.segment.now()[0]);
    return out;
}

IntegrabilityDiagnostic integrability_diagnostic(std::span<const SampledSegment> samples, double lambda) {
    IntegrabilityDiagnostic diag;
    std::vector<double> values(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double s = sup_norm(samples[i].segment);
        if (capped_exp(lambda, s * s, values[i])) ++diag.overflow_flags;
    }
    diag.moment = summarize(values);
    return diag;
}

std::vector<HyperboundRow> hyperbounded_diagnostic(const SolverConfig& config,
                                                   std::span<const SampledSegment> samples,
                                                   std::span<const Functional> functionals, const McOptions& inner) {
    const double r = config.grid().memory_length();
    const double L = config.drift().lipschitz();
    if (!(L > 0.0)) throw DomainError("hyperbounded_diagnostic: requires a memory term with L > 0");
    if (!(config.horizon() > r + 1.0 / L)) throw DomainError("hyperbounded_diagnostic: requires T > r + 1/L");
    if (samples.empty()) throw DomainError("hyperbounded_diagnostic: no samples");

    std::vector<SegmentFunctional> evals;
    for (const auto& f : functionals) evals.push_back(f.eval);

    std::vector<std::vector<double>> semigroup(functionals.size(), std::vector<double>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        McOptions mc = inner;
        mc.master_seed = splitmix64(inner.master_seed + i);
        const auto values = terminal_values(config, samples[i].segment, evals, mc);
        for (std::size_t j = 0; j < functionals.size(); ++j) semigroup[j][i] = summarize(values[j]).mean;
    }

    std::vector<HyperboundRow> rows;
    for (std::size_t j = 0; j < functionals.size(); ++j) {
        CompensatedSum l4, l2;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double pf = semigroup[j][i];
            const double f = functionals[j].eval(samples[i].segment);
            l4.add(pf * pf * pf * pf);
            l2.add(f * f);
        }
        const double n = static_cast<double>(samples.size());
        HyperboundRow row;
        row.functional = functionals[j].name;
        row.l4_norm_of_semigroup = std::pow(l4.value() / n, 0.25);
        row.l2_norm = std::sqrt(l2.value() / n);
        row.ratio = row.l2_norm > 0.0 ? row.l4_norm_of_semigroup / row.l2_norm : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sfde
