// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "sfde/errors.hpp"
#include "sfde/harnack.hpp"

namespace sfde {
namespace {

Segment constant1(const TimeGrid& g, double v) { return Segment::constant(g, std::span<const double>(&v, 1)); }

DriftSpec reference_drift() {
    return {DissipativeField::linear(1.0), MemoryFunctional::point_delay(ScalarMap::Sin, 0.5)};
}

double grid_oracle(double gap0, double gap_sup, double L, double r, double T) {
    double best = std::numeric_limits<double>::infinity();
    const int n = 200000;
    for (int i = 1; i <= n; ++i) best = std::min(best, rho_objective(r + (T - r) * i / n, gap0, gap_sup, L, r));
    return best;
}

TEST(Rho, VariationalExamples) {
    EXPECT_EQ(rho_sq_variational(0.0, 0.0, 1.0, 1.0, 3.0), 0.0);
    EXPECT_NEAR(rho_sq_variational(1.0, 1.0, 1.0, 1.0, 3.0), 3.0, 1e-12);
    EXPECT_NEAR(rho_sq_minimizer(1.0, 1.0, 1.0, 1.0, 3.0), 2.0, 1e-6);
    EXPECT_NEAR(rho_sq_variational(1.0, 1.0, 1.0, 1.0, 1.5), 3.5, 1e-12);
    EXPECT_EQ(rho_sq_minimizer(1.0, 1.0, 1.0, 1.0, 1.5), 1.5);
    EXPECT_NEAR(rho_sq_variational(1.0, 1.0, 1.0, 1.0, 3.0), grid_oracle(1.0, 1.0, 1.0, 1.0, 3.0), 1e-6);
    EXPECT_NEAR(rho_sq_variational(1.0, 1.0, 1.0, 1.0, 1.5), grid_oracle(1.0, 1.0, 1.0, 1.0, 1.5), 1e-6);
    EXPECT_DOUBLE_EQ(rho_sq_variational(0.0, 2.0, 0.5, 1.0, 3.0), 1.0 * 0.25 * 4.0);
    EXPECT_THROW(rho_sq_variational(1.0, 1.0, 1.0, 1.0, 1.0), DomainError);
}

TEST(Rho, ClosedFormExamples) {
    EXPECT_DOUBLE_EQ(rho_sq_closed_form(1.0, 1.0, 1.0, 1.0, 3.0), 3.0);
    const double gap0 = 0.7, gap_sup = 1.3, L = 0.4, r = 0.5;
    const double threshold = r + gap0 / (L * gap_sup);
    const double lg = L * gap_sup;
    EXPECT_NEAR(gap0 * gap0 / (threshold - r) + threshold * lg * lg, 2.0 * gap0 * lg + r * lg * lg, 1e-12);
    EXPECT_NEAR(rho_sq_closed_form(gap0, gap_sup, L, r, threshold), 2.0 * gap0 * lg + r * lg * lg, 1e-12);
    EXPECT_EQ(rho_sq_closed_form(0.0, 0.0, 1.0, 1.0, 2.0), 0.0);
    EXPECT_THROW(rho_sq_closed_form(1.0, 0.5, 1.0, 1.0, 2.0), ContractError);
}

TEST(Rho, ClosedFormMatchesVariational) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double gap_sup = 0.01 + 3.0 * u(rng);
        const double gap0 = gap_sup * u(rng);
        const double L = 0.01 + 2.0 * u(rng);
        const double r = 0.1 + 2.0 * u(rng);
        const double T = r + 0.01 + 5.0 * u(rng);
        const double v = rho_sq_variational(gap0, gap_sup, L, r, T);
        const double c = rho_sq_closed_form(gap0, gap_sup, L, r, T);
        EXPECT_LE(std::abs(v - c), 1e-9 * std::abs(c)) << gap0 << " " << gap_sup << " " << L << " " << r << " " << T;
    }
}

TEST(Rho, MonotoneInHorizonAndVanishesOnlyAtZero) {
    double prev = std::numeric_limits<double>::infinity();
    for (double T = 1.05; T < 6.0; T += 0.25) {
        const double v = rho_sq_variational(0.8, 1.1, 0.7, 1.0, T);
        EXPECT_LE(v, prev * (1.0 + 1e-12));
        EXPECT_GT(v, 0.0);
        prev = v;
    }
    EXPECT_EQ(rho_sq_closed_form(0.0, 0.0, 0.7, 1.0, 2.0), 0.0);
}

TEST(Rho, SymmetricInStartingPoints) {
    const TimeGrid g(1.0 / 16, 16, 2);
    const auto x = Segment::sample(g, [](double t, std::span<double> o) { o[0] = t; o[1] = std::sin(t); });
    const auto y = Segment::sample(g, [](double t, std::span<double> o) { o[0] = 0.5; o[1] = -t * t; });
    const auto a = segment_distance(x.view(), y.view()), b = segment_distance(y.view(), x.view());
    EXPECT_EQ(rho_sq_variational(a.gap0, a.gap_sup, 0.5, 1.0, 2.5), rho_sq_variational(b.gap0, b.gap_sup, 0.5, 1.0, 2.5));
}

TEST(TvBound, Examples) {
    EXPECT_EQ(tv_bound(0.0, 0.0, 1.0, 1.0, 2.0, 0.1), 0.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double delta = 1.0; delta > 1e-6; delta *= 0.5) {
        const double b = tv_bound(delta, delta, 0.5, 1.0, 2.0, 1e-3);
        EXPECT_LT(b, prev);
        prev = b;
    }
    EXPECT_LT(prev, 1e-5);
    EXPECT_NEAR(tv_bound(1.0, 1.0, 1.0, 1.0, 2.0, 1e-9), std::sqrt(std::exp(6.0) - 1.0), 1e-6);
    EXPECT_NEAR(tv_bound_unsquared_gap(0.25, 0.25, 1.0, 1.0, 2.0, 1e-9),
                std::sqrt(std::exp(2.0 * (0.25 + 2.0 * 0.0625)) - 1.0), 1e-9);
    EXPECT_THROW(tv_bound(1.0, 1.0, 1.0, 1.0, 1.0, 0.5), DomainError);
}

TEST(DefaultDeadline, IsOnGridAndNearMinimizer) {
    const TimeGrid g(1.0 / 64, 64, 1);
    const SolverConfig cfg(g, 3.0, reference_drift());
    const auto x0 = constant1(g, 1.0), y0 = constant1(g, 0.0);
    const double s = default_deadline(cfg, x0.view(), y0.view());
    EXPECT_TRUE(g.is_aligned(s));
    EXPECT_GT(s, 1.0);
    EXPECT_LE(s, 3.0);
    EXPECT_NEAR(s, rho_sq_minimizer(1.0, 1.0, 0.5, 1.0, 3.0), g.dt());
}

TEST(Weighted, ConstantFunctionalEstimatesOne) {
    const TimeGrid g(1.0 / 64, 64, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = constant1(g, 1.0), y0 = constant1(g, 0.25);
    const auto c = CouplingConfig::for_deadline(1e-3, default_deadline(cfg, x0.view(), y0.view()), x0.view(), y0.view());
    const auto e = estimate_pTf_weighted(cfg, x0, y0, c, constant_functional(1.0).eval, {100000, 31, 0});
    EXPECT_LT(std::abs(e.mean - 1.0), 3.0 * e.std_error);
}

TEST(Weighted, NullCouplingEqualsDirect) {
    const TimeGrid g(1.0 / 32, 32, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = Segment::sample(g, [](double t, std::span<double> o) { o[0] = 1.0 + t; });
    const auto c = CouplingConfig::for_deadline(0.5, 1.5, x0.view(), x0.view());
    const auto f = sigmoid_functional().eval;
    const McOptions mc{2000, 41, 0};
    const auto w = estimate_pTf_weighted(cfg, x0, x0, c, f, mc);
    const auto d = estimate_pTf_direct(cfg, x0, f, mc);
    EXPECT_EQ(w.mean, d.mean);
    EXPECT_EQ(w.std_error, d.std_error);
}

TEST(Weighted, AgreesWithDirectSimulation) {
    const TimeGrid g(1.0 / 64, 64, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = constant1(g, 1.0), y0 = constant1(g, 0.0);
    const auto c = CouplingConfig::for_deadline(1e-3, default_deadline(cfg, x0.view(), y0.view()), x0.view(), y0.view());
    const McOptions mc{20000, 17, 0};
    for (const auto& f : default_functional_catalog()) {
        const auto w = estimate_pTf_weighted(cfg, x0, y0, c, f.eval, mc);
        const auto d = estimate_pTf_direct(cfg, y0, f.eval, {mc.n_paths, mc.master_seed + 1, 0});
        EXPECT_LT(std::abs(w.mean - d.mean), 3.0 * std::hypot(w.std_error, d.std_error)) << f.name;
    }
}

TEST(HarnackCheck, ConstantFunctionalPasses) {
    const TimeGrid g(1.0 / 32, 32, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = constant1(g, 1.0), y0 = constant1(g, 0.0);
    const auto c = CouplingConfig::for_deadline(1e-3, 1.5, x0.view(), y0.view());
    const auto rep = harnack_check({3.0, cfg, constant_functional(0.5), x0, y0}, c, {500, 1, 0});
    EXPECT_DOUBLE_EQ(rep.lhs.estimate, 0.125);
    EXPECT_GE(rep.rhs.lower, rep.lhs.upper);
    EXPECT_TRUE(rep.pass);
}

TEST(HarnackCheck, IdenticalStartsReduceToJensen) {
    const TimeGrid g(1.0 / 32, 32, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = constant1(g, 0.3);
    const auto c = CouplingConfig::for_deadline(1e-3, 1.5, x0.view(), x0.view());
    const std::vector<double> ps{1.5, 2.0, 4.0};
    const auto fs = default_functional_catalog();
    for (const auto& rep : harnack_sweep(cfg, x0, x0, ps, fs, c, {5000, 3, 0})) {
        EXPECT_EQ(rep.rho_sq, 0.0);
        EXPECT_GE(rep.rhs.estimate, rep.lhs.estimate) << rep.functional << " p=" << rep.p;
        EXPECT_TRUE(rep.pass) << rep.functional << " p=" << rep.p;
    }
}

TEST(HarnackCheck, ReferenceInstancePasses) {
    const TimeGrid g(1.0 / 128, 128, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = constant1(g, 1.0), y0 = constant1(g, 0.0);
    const auto c = CouplingConfig::for_deadline(1e-3, default_deadline(cfg, x0.view(), y0.view()), x0.view(), y0.view());
    const auto rep = harnack_check({2.0, cfg, sigmoid_functional(1.0, 0.0), x0, y0}, c, {100000, 2026, 0}, 0.99);
    EXPECT_TRUE(rep.pass) << rep.lhs.upper << " vs " << rep.rhs.lower;
    EXPECT_TRUE(rep.cross_check_ok);
    EXPECT_NEAR(rep.rho_sq, rep.rho_sq_closed, 1e-9 * rep.rho_sq_closed);
}

TEST(HarnackCheck, Validation) {
    const TimeGrid g(0.25, 4, 1);
    const auto x0 = constant1(g, 1.0);
    const auto c = CouplingConfig::for_deadline(0.5, 1.0 + 0.25, x0.view(), x0.view());
    const SolverConfig short_cfg(g, 1.0, reference_drift());
    EXPECT_THROW(harnack_check({2.0, short_cfg, sigmoid_functional(), x0, x0}, c, {10, 1, 0}), DomainError);
    const SolverConfig cfg(g, 2.0, reference_drift());
    EXPECT_THROW(harnack_check({1.0, cfg, sigmoid_functional(), x0, x0}, c, {10, 1, 0}), DomainError);
    const Functional signed_f{"x(0)", [](SegmentView x) { return x.now()[0]; }, 1.0, false};
    EXPECT_THROW(harnack_check({2.0, cfg, signed_f, x0, x0}, c, {10, 1, 0}), ContractError);
}

TEST(StrongFeller, GapsStayBelowBound) {
    const TimeGrid g(1.0 / 64, 64, 1);
    const SolverConfig cfg(g, 2.0, reference_drift());
    const auto x0 = constant1(g, 0.5);
    const auto dir = constant1(g, 1.0);
    const std::vector<double> deltas{0.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    const std::vector<Functional> fs{sigmoid_functional(), ball_indicator(1.0)};
    const auto rows = strong_feller_probe(cfg, x0, dir, deltas, fs, {5000, 12, 0}, 1e-3);
    ASSERT_EQ(rows.size(), deltas.size() * fs.size());
    for (const auto& row : rows) {
        EXPECT_TRUE(row.within_bound) << row.functional << " delta " << row.delta;
        if (row.delta == 0.0) {
            EXPECT_EQ(row.gap, 0.0);
            EXPECT_EQ(row.bound, 0.0);
        }
    }
    for (std::size_t i = 2; i < deltas.size(); ++i) EXPECT_LT(rows[2 * i].bound, rows[2 * (i - 1)].bound);
}

}  // namespace
}  // namespace sfde
