#include "sorterlab/fit.hpp"
#include "sorterlab/scatter.hpp"
#include "sorterlab/sorter.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace sorterlab;

constexpr double kLabFwhm = 700.0 / 648.0;

Pulse lab_pulse(int n) {
    return gaussian_pulse(make_frequency_grid(n, 20.0), 0.0, kLabFwhm, 0.0);
}

EmitterParams lab_emitter() {
    EmitterParams e;
    e.beta = 0.75;
    e.dephasing = 0.035;
    e.spectral_diffusion = 0.67;
    return e;
}

void BM_ScatterTwo(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = lab_pulse(n);
    EmitterParams e;
    e.beta = 0.9;
    e.dephasing = 0.02;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scatter_two(p, e).total_norm2());
    }
}
BENCHMARK(BM_ScatterTwo)->Arg(64)->Arg(128)->Arg(256);

void BM_SortPulseAnchor(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    const auto p = lab_pulse(256);
    const auto e = lab_emitter();
    const SorterConfig cfg{256, 20.0, nodes};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sorter_success(sort_pulse(p, e, cfg)));
    }
}
BENCHMARK(BM_SortPulseAnchor)->Arg(1)->Arg(13)->Arg(21)->Unit(benchmark::kMillisecond);

void BM_ForwardModelPoint(benchmark::State& state) {
    const auto p = lab_pulse(128);
    const std::vector<double> detunings{-4.0, 0.0, 4.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            forward_model({0.75, 0.035, 0.67}, detunings, p, {128, 20.0, 13}));
    }
}
BENCHMARK(BM_ForwardModelPoint)->Unit(benchmark::kMillisecond);

void BM_SorterOutputState(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = lab_pulse(n);
    const auto e = lab_emitter();
    const SorterConfig cfg{n, 20.0, 5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sorter_output_state(p, e, cfg).total_weight());
    }
}
BENCHMARK(BM_SorterOutputState)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
