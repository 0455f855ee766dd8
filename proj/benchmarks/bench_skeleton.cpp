#include <benchmark/benchmark.h>

#include "csd/skeleton.hpp"
#include "csd/synth.hpp"

namespace {

void ExtractTube(benchmark::State& state) {
    int n = int(state.range(0));
    auto scene = csd::rasterize_scene(csd::presets::straight_tube({n, n / 2, n / 2}, 6.0),
                                      {n, n / 2, n / 2});
    for (auto _ : state) {
        csd::CurveSkeleton skel = csd::extract_skeleton(scene.volume);
        benchmark::DoNotOptimize(skel.branches.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(ExtractTube)->RangeMultiplier(2)->Range(64, 256)->Complexity()->Unit(benchmark::kMillisecond);

void ExtractCrossing(benchmark::State& state) {
    int n = int(state.range(0));
    auto scene = csd::rasterize_scene(csd::presets::x_crossing({n, n, n / 2}, 6.0), {n, n, n / 2});
    for (auto _ : state) {
        csd::CurveSkeleton skel = csd::extract_skeleton(scene.volume);
        benchmark::DoNotOptimize(skel.branches.data());
    }
}
BENCHMARK(ExtractCrossing)->Arg(96)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
