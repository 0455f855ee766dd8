#include <benchmark/benchmark.h>

#include "csd/decompose.hpp"
#include "csd/synth.hpp"

namespace {

void DecomposeCrossing(benchmark::State& state) {
    int n = int(state.range(0));
    auto scene = csd::rasterize_scene(csd::presets::x_crossing({n, n, n / 2}, 6.0), {n, n, n / 2});
    csd::RunConfig cfg;
    for (auto _ : state) {
        csd::DecompositionResult r = csd::decompose(scene.volume, cfg);
        benchmark::DoNotOptimize(r.labels.data.data());
    }
}
BENCHMARK(DecomposeCrossing)->Arg(96)->Arg(128)->Unit(benchmark::kMillisecond);

void DecomposeBySamplingFactor(benchmark::State& state) {
    auto scene = csd::rasterize_scene(csd::presets::x_crossing({128, 128, 64}, 6.0), {128, 128, 64});
    csd::RunConfig cfg;
    cfg.sf = int(state.range(0));
    for (auto _ : state) {
        csd::DecompositionResult r = csd::decompose(scene.volume, cfg);
        benchmark::DoNotOptimize(r.labels.data.data());
    }
}
BENCHMARK(DecomposeBySamplingFactor)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
