// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sfde/errors.hpp"
#include "sfde/segment.hpp"

namespace sfde {
namespace {

TEST(TimeGrid, RejectsInvalidParameters) {
    EXPECT_THROW(TimeGrid(0.0, 4, 1), DomainError);
    EXPECT_THROW(TimeGrid(0.1, 0, 1), DomainError);
    EXPECT_THROW(TimeGrid(0.1, 4, 0), DomainError);
    const TimeGrid g(0.25, 4, 2);
    EXPECT_DOUBLE_EQ(g.memory_length(), 1.0);
    EXPECT_EQ(g.points(), 5u);
}

TEST(TimeGrid, StepsForChecksAlignment) {
    const TimeGrid g(0.01, 100, 1);
    EXPECT_EQ(g.steps_for(0.03), 3u);
    EXPECT_EQ(g.steps_for(2.0), 200u);
    EXPECT_THROW(g.steps_for(0.005), GridAlignmentError);
}

TEST(SupNorm, Examples) {
    const TimeGrid g3(0.5, 2, 3);
    const std::vector<double> c{1.0, -2.0, 2.0};
    EXPECT_DOUBLE_EQ(sup_norm(Segment::constant(g3, c)), 3.0);

    const TimeGrid g1(0.5, 2, 1);
    EXPECT_DOUBLE_EQ(sup_norm(Segment(g1, {1.0, -3.0, 2.0})), 3.0);
    EXPECT_DOUBLE_EQ(sup_norm(Segment::zero(g1)), 0.0);
}

TEST(SupNorm, IsANormOnRandomSegments) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> e(-4, 4);
    for (std::size_t d : {1u, 3u}) {
        const TimeGrid g(0.1, 7, d);
        const auto n = g.points() * d;
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<double> a(n), b(n), s(n), scaled(n);
            for (auto& v : a) v = u(rng);
            for (auto& v : b) v = u(rng);
            const double c = std::ldexp(u(rng) < 0 ? -1.0 : 1.0, e(rng));
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = a[i] + b[i];
                scaled[i] = c * a[i];
            }
            const double na = sup_norm(Segment(g, a));
            const double nb = sup_norm(Segment(g, b));
            const double ns = sup_norm(Segment(g, s));
            if (d == 1) {
                EXPECT_LE(ns, na + nb);
            } else {
                EXPECT_LE(ns, (na + nb) * (1.0 + 1e-15));
            }
            // Power-of-two scalings are exact in binary floating point.
            EXPECT_EQ(sup_norm(Segment(g, scaled)), std::abs(c) * na);
        }
    }
}

TEST(Segment, RejectsBadShapes) {
    const TimeGrid g(0.5, 2, 1);
    EXPECT_THROW(Segment(g, {1.0, 2.0}), ContractError);
    EXPECT_THROW(Segment(g, {1.0, NAN, 2.0}), ContractError);
}

TEST(Segment, SampleUsesGridTimes) {
    const TimeGrid g(0.25, 4, 1);
    const auto s = Segment::sample(g, [](double t, std::span<double> out) { out[0] = t; });
    EXPECT_DOUBLE_EQ(s.point(0)[0], -1.0);
    EXPECT_DOUBLE_EQ(s.point(2)[0], -0.5);
    EXPECT_DOUBLE_EQ(s.now()[0], 0.0);
}

TrajectoryHistory ramp_history(const TimeGrid& g, int extra_steps) {
    // Value k*dt at entry k, so the initial segment runs from 0 to r.
    std::vector<double> init(g.points());
    for (std::size_t k = 0; k < g.points(); ++k) init[k] = static_cast<double>(k) * g.dt();
    TrajectoryHistory h(Segment(g, init));
    for (int i = 1; i <= extra_steps; ++i) {
        const double v = static_cast<double>(g.n_memory() + i) * g.dt();
        h.append(std::span<const double>(&v, 1));
    }
    return h;
}

TEST(ExtractSegment, Examples) {
    const TimeGrid g(0.25, 4, 1);
    const auto h = ramp_history(g, 8);
    const auto at0 = extract_segment(h, 0.0);
    EXPECT_EQ(std::vector<double>(at0.values().begin(), at0.values().end()),
              std::vector<double>({0.0, 0.25, 0.5, 0.75, 1.0}));
    const auto at_r = extract_segment(h, 1.0);
    EXPECT_EQ(at_r.values()[0], 1.0);
    EXPECT_EQ(at_r.values()[4], 2.0);
    EXPECT_THROW(extract_segment(h, 0.125), GridAlignmentError);
    EXPECT_THROW(extract_segment(h, 2.25), OutOfRangeError);
    EXPECT_THROW(extract_segment(h, -0.25), OutOfRangeError);
}

TEST(ExtractSegment, ConsecutiveWindowsOverlap) {
    const TimeGrid g(0.25, 4, 1);
    const auto h = ramp_history(g, 12);
    for (int k = 0; k < 12; ++k) {
        const auto a = extract_segment(h, k * 0.25);
        const auto b = extract_segment(h, (k + 1) * 0.25);
        for (std::size_t j = 0; j < g.n_memory(); ++j) EXPECT_EQ(a.values()[j + 1], b.values()[j]);
    }
}

TEST(SegmentDistance, Examples) {
    const TimeGrid g(0.5, 2, 2);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> xv(6);
    for (auto& v : xv) v = u(rng);
    const Segment x(g, xv);
    auto gap = segment_distance(x, x);
    EXPECT_EQ(gap.gap0, 0.0);
    EXPECT_EQ(gap.gap_sup, 0.0);

    std::vector<double> yv = xv;
    for (std::size_t i = 0; i < yv.size(); i += 2) {
        yv[i] += 0.75;
        yv[i + 1] += 1.0;
    }
    gap = segment_distance(x, Segment(g, yv));
    EXPECT_NEAR(gap.gap0, 1.25, 1e-15);
    EXPECT_NEAR(gap.gap_sup, 1.25, 1e-15);

    const TimeGrid g1(0.5, 2, 1);
    gap = segment_distance(Segment(g1, {0.5, -2.0, 1.0}), Segment::zero(g1));
    EXPECT_DOUBLE_EQ(gap.gap0, 1.0);
    EXPECT_DOUBLE_EQ(gap.gap_sup, 2.0);

    EXPECT_THROW(segment_distance(Segment::zero(g1), Segment::zero(TimeGrid(0.25, 4, 1))), IncompatibleGridError);
}

TEST(SegmentDistance, TerminalGapNeverExceedsSupGap) {
    const TimeGrid g(0.1, 10, 2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a(22), b(22);
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        const auto gap = segment_distance(Segment(g, a), Segment(g, b));
        EXPECT_LE(gap.gap0, gap.gap_sup);
    }
}

}  // namespace
}  // namespace sfde
