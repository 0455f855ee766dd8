#include "csd/skeleton.hpp"
#include "csd/synth.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace csd;

TEST_SUITE("synth") {

TEST_CASE("straight tube volume matches the analytic cylinder") {
    auto specs = presets::straight_tube({120, 24, 24}, 5.0);
    SynthScene scene = rasterize_scene(specs, {120, 24, 24});
    double length = distance(specs[0].axis[0], specs[0].axis[1]);
    double analytic = M_PI * 25.0 * length;
    double spherical_caps = 4.0 / 3.0 * M_PI * 125.0;  // capsule ends
    double count = double(scene.volume.foreground_count());
    CHECK(count >= 0.97 * analytic);
    CHECK(count <= 1.03 * (analytic + spherical_caps));
}

TEST_CASE("ground truth covers exactly the foreground with one label per tube") {
    SynthScene scene = rasterize_scene(presets::x_crossing({64, 64, 32}, 5.0), {64, 64, 32});
    CHECK(scene.ground_truth.max_label() == 2);
    for (std::size_t i = 0; i < scene.volume.data.size(); ++i)
        CHECK((scene.volume.data[i] != 0) == (scene.ground_truth.data[i] != 0));
}

TEST_CASE("rasterization is deterministic") {
    auto specs = presets::weave({200, 100, 24}, 4.0);
    SynthScene a = rasterize_scene(specs, {200, 100, 24});
    SynthScene b = rasterize_scene(specs, {200, 100, 24});
    CHECK(a.volume.data == b.volume.data);
    CHECK(a.ground_truth.data == b.ground_truth.data);
}

TEST_CASE("single tube surface is genus zero") {
    SynthScene scene = rasterize_scene(presets::straight_tube({60, 20, 20}, 5.0), {60, 20, 20});
    TriangleMesh mesh = marching_cubes(scene.volume);
    CHECK(oracle::euler_characteristic(mesh) == 2);
}

TEST_CASE("out-of-bounds axis is rejected") {
    std::vector<TubeSpec> specs{{{{2, 10, 10}, {30, 10, 10}}, 5.0, -1.0, 1}};
    CHECK_THROWS_WITH_AS(rasterize_scene(specs, {32, 20, 20}), doctest::Contains("bounds"), Error);
}

TEST_CASE("radius below the rasterization floor is rejected") {
    std::vector<TubeSpec> specs{{{{8, 10, 10}, {24, 10, 10}}, 1.2, -1.0, 1}};
    CHECK_THROWS_WITH_AS(rasterize_scene(specs, {32, 20, 20}), doctest::Contains("1.5"), Error);
}

TEST_CASE("tapered tube narrows monotonically") {
    SynthScene scene = rasterize_scene(presets::tapered_tube({120, 32, 32}, 8.0, 4.0), {120, 32, 32});
    // count per-slice area at a quarter and three quarters of the length
    auto slice_area = [&](int x) {
        int count = 0;
        for (int z = 0; z < 32; ++z)
            for (int y = 0; y < 32; ++y)
                if (scene.volume.at(x, y, z)) ++count;
        return count;
    };
    CHECK(slice_area(30) > slice_area(90));
}

TEST_CASE("scene spec json round trip") {
    auto specs = presets::five_branch({128, 128, 128}, 5.0);
    std::string path = "/tmp/csd_scene_test.json";
    save_scene_spec(specs, {128, 128, 128}, {1, 1, 1}, path);
    Vec3i dims;
    Vec3 spacing;
    load_scene_header(path, dims, spacing);
    auto back = load_scene_spec(path);
    CHECK(dims.x == 128);
    REQUIRE(back.size() == specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        CHECK(back[i].label == specs[i].label);
        CHECK(back[i].radius_start == doctest::Approx(specs[i].radius_start));
        REQUIRE(back[i].axis.size() == specs[i].axis.size());
        for (std::size_t k = 0; k < specs[i].axis.size(); ++k)
            CHECK(distance(back[i].axis[k], specs[i].axis[k]) < 1e-9);
    }
    std::remove(path.c_str());
}

TEST_CASE("weave scene yields seven skeleton branches") {
    // scaled-down relative of the large fixture; same topology
    SynthScene scene = rasterize_scene(presets::weave({400, 200, 48}, 6.0), {400, 200, 48});
    CurveSkeleton skel = extract_skeleton(scene.volume);
    CHECK(skel.branches.size() == 7);
    CHECK(skel.junction_nodes().size() == 2);
}

}  // TEST_SUITE
