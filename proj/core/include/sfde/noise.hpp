// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <span>

namespace sfde {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) noexcept;
};

/// SplitMix64 finalizer; a bijection on 64-bit integers.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Key of the substream for one path:
///   splitmix64(master_seed ^ splitmix64(path_index + 0x9E3779B97F4A7C15)).
/// Distinct path indices give distinct keys for a fixed master seed.
std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t path_index) noexcept;

/// Anything that can supply the Brownian increment of step k.
template <class S>
concept IncrementSource = requires(const S& s, std::uint64_t step, double dt, std::span<double> out) {
    { s.increment(step, dt, out) } -> std::same_as<void>;
};

/// Gaussian increments dW_k ~ N(0, dt I_d) for one path.
///
/// Increment k is a pure function of (master_seed, path_index, tag, k): the
/// Philox counter is (k_lo, k_hi, block, tag), each block yielding two normals
/// by Box-Muller. No state is carried between calls, so paths and steps may be
/// evaluated in any order.
class NoiseStream {
public:
    NoiseStream(std::uint64_t master_seed, std::uint64_t path_index, std::uint32_t tag = 0) noexcept;

    /// A stream whose increments are all zero, for deterministic runs.
    static NoiseStream silent() noexcept;

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t path_index() const noexcept { return path_index_; }
    bool is_silent() const noexcept { return silent_; }

    /// Fills out with d independent standard normals for step k.
    void standard_normals(std::uint64_t step, std::span<double> out) const noexcept;

    /// Fills out with sqrt(dt) * standard normals for step k.
    void increment(std::uint64_t step, double dt, std::span<double> out) const noexcept;

private:
    std::uint64_t master_seed_ = 0;
    std::uint64_t path_index_ = 0;
    Philox4x32::Key key_{};
    std::uint32_t tag_ = 0;
    bool silent_ = false;
};

/// Increments over steps of ratio * fine_dt, each the sum of `ratio`
/// consecutive fine increments of the base stream. Grids refined by powers of
/// the ratio then see one Brownian path.
class AggregatedIncrements {
public:
    AggregatedIncrements(NoiseStream base, std::uint64_t ratio, double fine_dt);

    void increment(std::uint64_t step, double dt, std::span<double> out) const;

private:
    NoiseStream base_;
    std::uint64_t ratio_;
    double fine_dt_;
};

}  // namespace sfde
