#include <benchmark/benchmark.h>

#include "csd/synth.hpp"
#include "csd/volume.hpp"

namespace {

csd::BinaryVolume make_tube(int n) {
    auto specs = csd::presets::straight_tube({n, n / 2, n / 2}, 6.0);
    return csd::rasterize_scene(specs, {n, n / 2, n / 2}).volume;
}

void DistanceField(benchmark::State& state) {
    csd::BinaryVolume vol = make_tube(int(state.range(0)));
    for (auto _ : state) {
        csd::ScalarField d = csd::distance_field(vol);
        benchmark::DoNotOptimize(d.data.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(DistanceField)->RangeMultiplier(2)->Range(64, 256)->Complexity();

void ConnectedComponents(benchmark::State& state) {
    csd::BinaryVolume vol = make_tube(int(state.range(0)));
    for (auto _ : state) {
        csd::LabelVolume l = csd::connected_components(vol, csd::Connectivity::six);
        benchmark::DoNotOptimize(l.data.data());
    }
}
BENCHMARK(ConnectedComponents)->RangeMultiplier(2)->Range(64, 256);

void MarchingCubes(benchmark::State& state) {
    csd::BinaryVolume vol = make_tube(int(state.range(0)));
    for (auto _ : state) {
        csd::TriangleMesh m = csd::marching_cubes(vol);
        benchmark::DoNotOptimize(m.vertices.data());
    }
}
BENCHMARK(MarchingCubes)->RangeMultiplier(2)->Range(64, 128);

}  // namespace

BENCHMARK_MAIN();
