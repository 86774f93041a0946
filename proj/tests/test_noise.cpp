// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include <cmath>
#include <vector>

#include "sfde/noise.hpp"
#include "sfde/stats.hpp"

namespace sfde {
namespace {

// Known-answer vectors of the Random123 distribution (kat_vectors, philox4x32 10 rounds).
TEST(Philox, KnownAnswerVectors) {
    using C = Philox4x32::Counter;
    EXPECT_EQ(Philox4x32::apply({0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(NoiseStream, IsAPureFunctionOfSeedPathAndStep) {
    const NoiseStream a(42, 7);
    const NoiseStream b(42, 7);
    std::vector<double> x(3), y(3);
    a.increment(1000, 0.5, x);
    for (int k = 0; k < 50; ++k) b.increment(k, 0.5, y);  // unrelated calls in between
    b.increment(1000, 0.5, y);
    EXPECT_EQ(x, y);

    NoiseStream(42, 8).increment(1000, 0.5, y);
    EXPECT_NE(x, y);
    NoiseStream(43, 7).increment(1000, 0.5, y);
    EXPECT_NE(x, y);
}

TEST(NoiseStream, SilentStreamIsZero) {
    std::vector<double> x(4, 1.0);
    NoiseStream::silent().increment(3, 0.1, x);
    for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(NoiseStream, IncrementsHaveVarianceDt) {
    const double dt = 0.25;
    const int n = 100000;
    std::vector<double> first(n), second(n), squares(n), cross(n);
    std::vector<double> w(2);
    for (int k = 0; k < n; ++k) {
        NoiseStream(1, 0).increment(k, dt, w);
        first[k] = w[0];
        second[k] = w[1];
        squares[k] = w[0] * w[0];
    }
    const auto m = summarize(first);
    EXPECT_LT(std::abs(m.mean), 4.0 * m.std_error);
    const auto v = summarize(squares);
    EXPECT_LT(std::abs(v.mean - dt), 4.0 * v.std_error);

    // Independent components and independent paths.
    for (int k = 0; k < n; ++k) cross[k] = first[k] * second[k];
    const auto c = summarize(cross);
    EXPECT_LT(std::abs(c.mean), 4.0 * c.std_error);
    for (int k = 0; k < n; ++k) {
        NoiseStream(1, 1).increment(k, dt, w);
        cross[k] = first[k] * w[0];
    }
    const auto cp = summarize(cross);
    EXPECT_LT(std::abs(cp.mean), 4.0 * cp.std_error);
}

TEST(NoiseStream, NormalsPassKolmogorovSmirnov) {
    std::vector<double> z(20000);
    std::vector<double> w(1);
    for (std::size_t k = 0; k < z.size(); ++k) {
        NoiseStream(99, k).standard_normals(0, w);
        z[k] = w[0];
    }
    EXPECT_GT(ks_test_normal(z, 0.0, 1.0).p_value, 0.01);
}

TEST(StreamKey, DistinctPathsGiveDistinctKeys) {
    std::vector<std::uint64_t> keys;
    for (std::uint64_t p = 0; p < 1000; ++p) keys.push_back(derive_stream_key(5, p));
    std::sort(keys.begin(), keys.end());
    EXPECT_EQ(std::adjacent_find(keys.begin(), keys.end()), keys.end());
}

}  // namespace
}  // namespace sfde
