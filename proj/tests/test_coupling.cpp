// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sfde/coupling.hpp"
#include "sfde/errors.hpp"
#include "sfde/parallel.hpp"
#include "sfde/stats.hpp"

namespace sfde {
namespace {

double potential(std::span<const double> x, double eps) { return std::pow(euclidean_norm(x), 1.0 + eps) / (1.0 + eps); }

Segment constant1(const TimeGrid& g, double v) { return Segment::constant(g, std::span<const double>(&v, 1)); }

DriftSpec reference_drift() {
    return {DissipativeField::linear(1.0), MemoryFunctional::point_delay(ScalarMap::Sin, 0.5)};
}

TEST(HoelderMap, Examples) {
    EXPECT_EQ(h_map(std::vector<double>{0.0, 0.0}, 0.3), (std::vector<double>{0.0, 0.0}));
    const auto e = h_map(std::vector<double>{0.6, 0.8}, 0.7);
    EXPECT_NEAR(e[0], 0.6, 1e-15);
    EXPECT_NEAR(e[1], 0.8, 1e-15);
    EXPECT_DOUBLE_EQ(h_map(std::vector<double>{4.0}, 0.5)[0], 2.0);
    EXPECT_DOUBLE_EQ(h_map(std::vector<double>{-4.0}, 0.5)[0], -2.0);
    EXPECT_THROW(HoelderMap(0.0), DomainError);
    EXPECT_THROW(HoelderMap(1.0), DomainError);
}

TEST(HoelderMap, ContinuousAtZero) {
    for (double t : {1e-2, 1e-4, 1e-8}) EXPECT_LE(std::abs(h_map(std::vector<double>{t}, 0.5)[0]), std::sqrt(t) * 1.0000001);
}

TEST(HoelderMap, Monotone) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 10000; ++i) {
        const std::size_t d = 1 + i % 4;
        std::vector<double> a(d), b(d), diff(d);
        for (std::size_t j = 0; j < d; ++j) {
            a[j] = n(rng) * 3.0;
            b[j] = n(rng) * 3.0;
            diff[j] = a[j] - b[j];
        }
        const double eps = u(rng);
        const auto ha = h_map(a, eps), hb = h_map(b, eps);
        std::vector<double> dh(d);
        for (std::size_t j = 0; j < d; ++j) dh[j] = ha[j] - hb[j];
        EXPECT_GE(dot(dh, diff), 0.0);
    }
}

TEST(HoelderMap, GradientOfPotential) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t d = 1 + i % 3;
        std::vector<double> x(d);
        for (auto& v : x) v = n(rng);
        if (euclidean_norm(x) < 0.1) continue;
        const double eps = u(rng);
        const double h = 1e-6 * euclidean_norm(x);
        const auto analytic = h_map(x, eps);
        std::vector<double> fd(d);
        for (std::size_t j = 0; j < d; ++j) {
            auto xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            fd[j] = (potential(xp, eps) - potential(xm, eps)) / (2.0 * h);
        }
        std::vector<double> err(d);
        for (std::size_t j = 0; j < d; ++j) err[j] = fd[j] - analytic[j];
        EXPECT_LE(euclidean_norm(err), 1e-5 * euclidean_norm(analytic));
    }
}

TEST(GammaS, Examples) {
    EXPECT_EQ(gamma_s(0.0, 0.5, 2.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(gamma_s(4.0, 0.5, 3.0, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(gamma_s(1.0, 0.25, 3.0, 1.0), 1.0 / (2.0 * 0.75));
    EXPECT_THROW(gamma_s(1.0, 0.5, 1.0, 1.0), DomainError);
}

TEST(CouplingBound, Examples) {
    EXPECT_DOUBLE_EQ(coupling_bound(1.7, 0.9, 0.3, 0.0), 1.7 * 1.7);
    EXPECT_EQ(coupling_bound(1.0, 2.0, 0.5, 1.0), 0.0);
    const double g = gamma_s(2.5, 0.4, 3.5, 1.0);
    EXPECT_GT(coupling_bound(2.5, g, 0.4, 2.5 - 1e-6), 0.0);
    EXPECT_EQ(coupling_bound(2.5, g, 0.4, 2.5 + 1e-12), 0.0);
    EXPECT_NEAR(coupling_bound(2.5, g, 0.4, 2.5), 0.0, 1e-20);
}

TEST(ZetaEnergyBound, Examples) {
    EXPECT_EQ(zeta_energy_bound(0.0, 0.0, 2.0, 1.0, 0.5, 3.0), 0.0);
    EXPECT_NEAR(zeta_energy_bound(1.0, 1.0, 2.0, 1.0, 1e-9, 1.0), 3.0, 1e-12);
    EXPECT_THROW(zeta_energy_bound(1.0, 1.0, 1.0, 1.0, 0.5, 1.0), DomainError);
}

TEST(SimulateCoupled, IdenticalStartsStayIdentical) {
    const TimeGrid g(1.0 / 64, 64, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = Segment::sample(g, [](double t, std::span<double> o) { o[0] = std::cos(2.0 * t); });
    const auto c = CouplingConfig::for_deadline(0.5, 1.5, x0.view(), x0.view());
    EXPECT_EQ(c.gamma, 0.0);
    const auto run = simulate_coupled(cfg, x0, x0, c, NoiseStream(5, 0));
    EXPECT_EQ(run.trajectory.coupling_step, std::optional<std::uint64_t>(0));
    EXPECT_EQ(run.ledger.log_weight, 0.0);
    EXPECT_EQ(run.ledger.energy, 0.0);
    EXPECT_EQ(density(run.ledger), 1.0);
    const auto as_vec = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
    EXPECT_EQ(as_vec(run.trajectory.x.raw()), as_vec(run.trajectory.y.raw()));
    EXPECT_EQ(as_vec(run.trajectory.x.raw()), as_vec(simulate(cfg, x0, NoiseStream(5, 0)).raw()));
}

TEST(SimulateCoupled, CouplesByDeadlineAndStaysCoupled) {
    const TimeGrid g(1.0 / 32, 32, 1);
    const SolverConfig cfg(g, 3.0, reference_drift());
    const auto x0 = constant1(g, 1.0), y0 = constant1(g, -0.5);
    const double s = 2.25;
    const auto c = CouplingConfig::for_deadline(1e-3, s, x0.view(), y0.view());
    for (std::uint64_t p = 0; p < 200; ++p) {
        const auto run = simulate_coupled(cfg, x0, y0, c, NoiseStream(8, p));
        const auto& t = run.trajectory;
        ASSERT_TRUE(t.coupling_step);
        EXPECT_LE(*t.coupling_step, g.steps_for(s - 1.0) + 1);
        for (auto k = *t.coupling_step; k <= t.x.steps(); ++k) {
            const auto a = t.x.at_step(k), b = t.y.at_step(k);
            ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
        }
        EXPECT_EQ(extract_segment(t.x, s), extract_segment(t.y, s));
    }
}

TEST(SimulateCoupled, MatchesScalarRecursionWithoutNoise) {
    const double lambda = 0.8, eps = 0.5, dt = 1.0 / 16;
    const TimeGrid g(dt, 16, 1);
    const SolverConfig cfg(g, 4.0, {DissipativeField::linear(lambda), MemoryFunctional::zero()});
    const auto x0 = constant1(g, 2.0), y0 = constant1(g, -1.0);
    const auto c = CouplingConfig::for_deadline(eps, 3.0, x0.view(), y0.view());
    const auto run = simulate_coupled(cfg, x0, y0, c, NoiseStream::silent());
    double r = 3.0;
    for (std::size_t k = 0; k < run.trajectory.r_values.size(); ++k) {
        EXPECT_NEAR(run.trajectory.r_values[k], r, 1e-12 * (1.0 + r)) << k;
        const double before = (1.0 - lambda * dt) * r;
        const double base = std::pow(before, 1.0 - eps) - c.gamma * (1.0 - eps) * dt;
        r = base > 0.0 ? std::pow(base, 1.0 / (1.0 - eps)) : 0.0;
    }
}

TEST(SimulateCoupled, PathwiseDecayBound) {
    const TimeGrid g(1.0 / 64, 64, 2);
    const std::vector<double> a{1.0, 0.5}, b{-0.3, 0.2};
    const auto x0 = Segment::constant(g, a), y0 = Segment::constant(g, b);
    const auto gap = segment_distance(x0.view(), y0.view());
    for (double eps : {1e-3, 0.3, 0.7}) {
        const auto c = CouplingConfig::for_deadline(eps, 2.0, x0.view(), y0.view());
        const SolverConfig linear(g, 2.5, {DissipativeField::linear(1.3), MemoryFunctional::zero()});
        const auto drift = drift_catalog()[3].spec;
        const SolverConfig general(g, 2.5, drift);
        const double L = drift.lipschitz();
        for (std::uint64_t p = 0; p < 50; ++p) {
            const auto lin = simulate_coupled(linear, x0, y0, c, NoiseStream(3, p));
            const auto gen = simulate_coupled(general, x0, y0, c, NoiseStream(3, p));
            for (std::size_t k = 0; k < lin.trajectory.r_values.size(); ++k) {
                const double t = static_cast<double>(k) * g.dt();
                const double bound = coupling_bound(gap.gap0, c.gamma, eps, t);
                const double rl = lin.trajectory.r_values[k], rg = gen.trajectory.r_values[k];
                EXPECT_LE(rl * rl, bound + 1e-10);
                EXPECT_LE(rg * rg, bound + L * L * g.dt() * gap.gap_sup * gap.gap_sup);
            }
        }
    }
}

TEST(SimulateCoupled, EnergyBoundHoldsPathwise) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto catalog = drift_catalog();
    for (int i = 0; i < 200; ++i) {
        const double dt = std::ldexp(1.0, -4 - static_cast<int>(u(rng) * 3));
        const std::size_t n_mem = 1 + static_cast<std::size_t>(u(rng) * 32);
        const TimeGrid g(dt, n_mem, 1 + i % 2);
        const double r = g.memory_length();
        const auto drift = catalog[i % catalog.size()].spec;
        const double T = r + dt * std::ceil((0.5 + 2.0 * u(rng)) / dt);
        const auto s_steps = g.steps_for(r) + 1 + static_cast<std::uint64_t>(u(rng) * (g.steps_for(T) - g.steps_for(r)));
        const double s = static_cast<double>(s_steps) * dt;
        const auto x0 = Segment::sample(g, [&](double t, std::span<double> o) {
            for (auto& v : o) v = std::sin(3.0 * t + 1.0);
        });
        const double shift = 2.0 * u(rng) - 1.0;
        const auto y0 = Segment::sample(g, [&](double t, std::span<double> o) {
            for (auto& v : o) v = shift * std::cos(t);
        });
        const double eps = 0.001 + 0.9 * u(rng);
        const auto c = CouplingConfig::for_deadline(eps, s, x0.view(), y0.view());
        const auto gap = segment_distance(x0.view(), y0.view());
        const double L = drift.lipschitz();
        const auto run = simulate_coupled(SolverConfig(g, T, drift), x0, y0, c, NoiseStream(100, i));
        const double bound = zeta_energy_bound(gap.gap0, gap.gap_sup, s, r, eps, L);
        EXPECT_LE(0.5 * run.ledger.energy, bound * (1.0 + 1e-6) + L * L * dt * gap.gap_sup * gap.gap_sup)
            << "config " << i;
    }
}

TEST(Density, MartingaleIdentity) {
    const TimeGrid g(1.0 / 128, 128, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = constant1(g, 1.0), y0 = constant1(g, 0.0);
    const auto c = CouplingConfig::for_deadline(1e-3, 2.0, x0.view(), y0.view());
    const std::uint64_t n = 20000;
    std::vector<double> d(n), d2(n);
    parallel_for(n, 0, [&](std::uint64_t p) {
        d[p] = density(simulate_coupled(cfg, x0, y0, c, NoiseStream(2718, p)).ledger);
        d2[p] = d[p] * d[p];
    });
    const auto m = summarize(d);
    EXPECT_LT(std::abs(m.mean - 1.0), 3.0 * m.std_error) << m.mean << " se " << m.std_error;

    const auto gap = segment_distance(x0.view(), y0.view());
    const auto m2 = summarize(d2);
    const double bound = std::exp(2.0 * zeta_energy_bound(gap.gap0, gap.gap_sup, 2.0, 1.0, 1e-3, 0.5));
    EXPECT_LE(m2.mean, bound + 3.0 * m2.std_error);
}

TEST(Density, OverflowIsReported) {
    GirsanovLedger big{800.0, 0.0};
    EXPECT_THROW(density(big), DomainError);
    EXPECT_EQ(log_density(big), 800.0);
    GirsanovLedger mixed{1.0, 4.0};
    EXPECT_DOUBLE_EQ(density(mixed), std::exp(-1.0));
}

TEST(SimulateCoupled, Validation) {
    const TimeGrid g(0.25, 4, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = constant1(g, 1.0), y0 = constant1(g, 0.0);
    EXPECT_THROW(simulate_coupled(cfg, x0, y0, {HoelderMap(0.5), 1.1, 1.0}, NoiseStream(1, 0)), GridAlignmentError);
    EXPECT_THROW(simulate_coupled(cfg, x0, y0, {HoelderMap(0.5), 2.5, 1.0}, NoiseStream(1, 0)), DomainError);
    EXPECT_THROW(simulate_coupled(cfg, x0, y0, {HoelderMap(0.5), 1.0, 1.0}, NoiseStream(1, 0)), DomainError);
    EXPECT_THROW(simulate_coupled(cfg, x0, constant1(TimeGrid(0.5, 2, 1), 0.0), {HoelderMap(0.5), 2.0, 1.0},
                                  NoiseStream(1, 0)),
                 IncompatibleGridError);
}

}  // namespace
}  // namespace sfde
