// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against their OpenMP counterparts. Both paths produce identical
// bits, so only wall time differs.

#include <benchmark/benchmark.h>

#include <numbers>

#include "mumimo/largescale.hpp"
#include "mumimo/montecarlo.hpp"

namespace {

mumimo::Scenario fig1_scenario(int antennas, int terminals) {
    mumimo::DropSpec spec;
    spec.array.antennas = antennas;
    spec.terminals = terminals;
    return mumimo::Scenario({antennas, 0.5, 10.0}, mumimo::draw_drop(spec, 7, 0), nullptr);
}

void run_sinr(benchmark::State& state, mumimo::Execution exec) {
    const auto s = fig1_scenario(static_cast<int>(state.range(0)), 3);
    const auto trials = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mumimo::estimate_expected_sinr(s, 0, trials, 1, exec));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trials));
}

void run_sweep(benchmark::State& state, mumimo::Execution exec) {
    const auto s = fig1_scenario(32, 3);
    const double rho[] = {0.1, 1.0, 10.0, 100.0, 1000.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(mumimo::estimate_sinr_sweep(s, rho, 20000, 3, exec));
    }
}

void BM_expected_sinr_serial(benchmark::State& s) { run_sinr(s, mumimo::Execution::serial_reference); }
void BM_expected_sinr_parallel(benchmark::State& s) { run_sinr(s, mumimo::Execution::parallel); }
void BM_sweep_serial(benchmark::State& s) { run_sweep(s, mumimo::Execution::serial_reference); }
void BM_sweep_parallel(benchmark::State& s) { run_sweep(s, mumimo::Execution::parallel); }

void BM_one_ring_factor(benchmark::State& state) {
    const mumimo::OneRingParams p(static_cast<int>(state.range(0)), 20.0 * std::numbers::pi / 180.0, 1.1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mumimo::make_correlation_factor(p));
    }
}

} // namespace

BENCHMARK(BM_expected_sinr_serial)->Args({8, 20000})->Args({32, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_expected_sinr_parallel)->Args({8, 20000})->Args({32, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_one_ring_factor)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
