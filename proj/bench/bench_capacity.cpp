// Serial reference loop (workers = 1) against the OpenMP loop (workers = 0)
// on the Monte-Carlo kernels.

#include <benchmark/benchmark.h>

#include "psam/allocopt.hpp"
#include "psam/capacity.hpp"

namespace {

using namespace psam;

SchemeConfig cgf_point() {
    SchemeConfig c;
    c.nt = 4;
    c.nr = 4;
    c.block_len = 100;
    c.pilot_len = 4;
    c.power = 10.0;
    c.alpha = 0.82;
    c.scheme = CgfDelayed{20, 0.2};
    return c;
}

SchemeConfig ccf_point() {
    SchemeConfig c = cgf_point();
    c.block_len = 20;
    c.pilot_len = 2;
    c.alpha = 0.75;
    c.scheme = Ccf{};
    c.covariance = exp_correlation(4, 0.5);
    return c;
}

void evaluate_delayed(benchmark::State& state) {
    const SimOptions sim{10000, 42, static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(cgf_point(), sim).mean);
}

void evaluate_ccf(benchmark::State& state) {
    const SimOptions sim{10000, 42, static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(ccf_point(), sim).mean);
}

void evaluate_on_pool(benchmark::State& state) {
    const TrialPool pool = TrialPool::build(4, 4, {10000, 42, 0}, true);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(cgf_point(), pool, static_cast<int>(state.range(0))).mean);
}

void gap(benchmark::State& state) {
    SchemeConfig c = cgf_point();
    c.scheme = NonFeedback{};
    const SimOptions sim{2000, 42, static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(gap_estimate(c, sim).gap_ratio);
}

void phi_star(benchmark::State& state) {
    const SimOptions sim{10000, 42, static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(phi_star_perfect_csi(4, 4, 0.2, 10.0, sim).phi_star);
}

// Arg 1 = serial reference, arg 0 = OpenMP default team.
BENCHMARK(evaluate_delayed)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(evaluate_ccf)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(evaluate_on_pool)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(gap)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(phi_star)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
