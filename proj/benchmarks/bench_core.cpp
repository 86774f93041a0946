// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "sfde/coupling.hpp"
#include "sfde/solver.hpp"

namespace {

using namespace sfde;

DriftSpec reference_drift() {
    return {DissipativeField::linear(1.0), MemoryFunctional::point_delay(ScalarMap::Sin, 0.5)};
}

void BM_PhiloxIncrement(benchmark::State& state) {
    const NoiseStream noise(1, 0);
    std::vector<double> out(static_cast<std::size_t>(state.range(0)));
    std::uint64_t k = 0;
    for (auto _ : state) {
        noise.increment(k++, 0.01, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PhiloxIncrement)->Arg(1)->Arg(4)->Arg(16);

void BM_Simulate(benchmark::State& state) {
    const TimeGrid grid(1.0 / 128, 128, static_cast<std::size_t>(state.range(0)));
    const SolverConfig config(grid, 2.0, reference_drift());
    const auto x0 = Segment::zero(grid);
    std::uint64_t path = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate(config, x0, NoiseStream(3, path++)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.steps()));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(4);

void BM_SimulateCoupled(benchmark::State& state) {
    const TimeGrid grid(1.0 / 128, 128, 1);
    const SolverConfig config(grid, 2.0, reference_drift());
    const double one = 1.0;
    const auto x0 = Segment::constant(grid, std::span<const double>(&one, 1));
    const auto y0 = Segment::zero(grid);
    const auto coupling = CouplingConfig::for_deadline(1e-3, 2.0, x0.view(), y0.view());
    std::uint64_t path = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_coupled(config, x0, y0, coupling, NoiseStream(5, path++)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.steps()));
}
BENCHMARK(BM_SimulateCoupled);

}  // namespace

BENCHMARK_MAIN();
