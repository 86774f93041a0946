// SPDX-License-Identifier: Apache-2.0
#include "sfde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sfde/errors.hpp"

namespace sfde {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// Uniform on the open interval (0, 1) with 53 random bits.
inline double to_open_unit(std::uint32_t a, std::uint32_t b) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(a) << 21) | (b >> 11);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t path_index) noexcept {
    return splitmix64(master_seed ^ splitmix64(path_index + 0x9E3779B97F4A7C15ull));
}

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t path_index, std::uint32_t tag) noexcept
    : master_seed_(master_seed), path_index_(path_index), tag_(tag) {
    const auto k = derive_stream_key(master_seed, path_index);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

NoiseStream NoiseStream::silent() noexcept {
    NoiseStream s(0, 0);
    s.silent_ = true;
    return s;
}

void NoiseStream::standard_normals(std::uint64_t step, std::span<double> out) const noexcept {
    if (silent_) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const auto lo = static_cast<std::uint32_t>(step);
    const auto hi = static_cast<std::uint32_t>(step >> 32);
    for (std::size_t i = 0, block = 0; i < out.size(); i += 2, ++block) {
        const auto r = Philox4x32::apply({lo, hi, static_cast<std::uint32_t>(block), tag_}, key_);
        const double u1 = to_open_unit(r[0], r[1]);
        const double u2 = to_open_unit(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[i] = radius * std::cos(angle);
        if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
    }
}

void NoiseStream::increment(std::uint64_t step, double dt, std::span<double> out) const noexcept {
    standard_normals(step, out);
    const double scale = std::sqrt(dt);
    for (auto& c : out) c *= scale;
}

AggregatedIncrements::AggregatedIncrements(NoiseStream base, std::uint64_t ratio, double fine_dt)
    : base_(base), ratio_(ratio), fine_dt_(fine_dt) {
    if (ratio == 0) throw DomainError("AggregatedIncrements: ratio must be >= 1");
    if (!(fine_dt > 0.0)) throw DomainError("AggregatedIncrements: fine step must be > 0");
}

void AggregatedIncrements::increment(std::uint64_t step, double, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> w(out.size());
    for (std::uint64_t j = 0; j < ratio_; ++j) {
        base_.increment(step * ratio_ + j, fine_dt_, w);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[i];
    }
}

}  // namespace sfde
