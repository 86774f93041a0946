// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace sfde {

/// Monte Carlo run parameters shared by all path estimators.
struct McOptions {
    std::uint64_t n_paths = 1000;
    std::uint64_t master_seed = 0;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned threads = 0;
};

inline unsigned resolve_threads(unsigned requested) noexcept {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on contiguous chunks, one per thread.
///
/// Results must be written to per-index storage by fn; nothing is shared.
/// If some calls throw, the exception of the lowest failing index is
/// rethrown, independent of the thread count.
template <class Fn>
void parallel_for(std::uint64_t n, unsigned threads, Fn&& fn) {
    const auto workers = static_cast<std::uint64_t>(std::min<std::uint64_t>(resolve_threads(threads), std::max<std::uint64_t>(n, 1)));
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    struct Failure {
        std::uint64_t index = UINT64_MAX;
        std::exception_ptr error;
    };
    std::vector<Failure> failures(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::uint64_t chunk = (n + workers - 1) / workers;
    for (std::uint64_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::uint64_t begin = w * chunk;
            const std::uint64_t end = std::min(n, begin + chunk);
            for (std::uint64_t i = begin; i < end; ++i) {
                try {
                    fn(i);
                } catch (...) {
                    failures[w] = {i, std::current_exception()};
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
        if (f.error) std::rethrow_exception(f.error);
}

}  // namespace sfde
