#include "csd/decompose.hpp"
#include "csd/frames.hpp"
#include "csd/synth.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace csd;

namespace {

// Count the voxels of an analytic straight cylinder along +x.
std::vector<std::size_t> analytic_cylinder_voxels(const GridShape& g, Vec3 base, double radius,
                                                  double length) {
    std::vector<std::size_t> out;
    for (int z = 0; z < g.dims.z; ++z)
        for (int y = 0; y < g.dims.y; ++y)
            for (int x = 0; x < g.dims.x; ++x) {
                Vec3 p = g.world(x, y, z);
                if (p.x < base.x || p.x > base.x + length) continue;
                if (std::hypot(p.y - base.y, p.z - base.z) <= radius) out.push_back(g.index(x, y, z));
            }
    return out;
}

double iou(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::set<std::size_t> sa(a.begin(), a.end());
    std::size_t inter = 0;
    for (std::size_t v : b)
        if (sa.count(v)) ++inter;
    return double(inter) / double(a.size() + b.size() - inter);
}

Contour circle_in_frame(double radius, int n, const PlaneFrame& frame) {
    Contour c = oracle::circle_contour(radius, n);
    c.frame = frame;
    return c;
}

PlaneFrame yz_frame(Vec3 origin) {
    PlaneFrame f;
    f.origin = origin;
    f.normal = {1, 0, 0};
    f.u = {0, 1, 0};
    f.v = {0, 0, 1};
    return f;
}

}  // namespace

TEST_SUITE("reconstruct") {

TEST_CASE("align recovers a cyclic shift") {
    Contour a = oracle::circle_contour(2.0, 64);
    Contour b = a;
    std::rotate(b.points.begin(), b.points.begin() + 7, b.points.end());
    auto [c1, c2] = align_contours(a, b);
    double residual = 0.0;
    for (std::size_t i = 0; i < c1.points.size(); ++i)
        residual += norm2(c1.points[i] - c2.points[i]);
    CHECK(residual == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("align recovers an orientation flip") {
    Contour a = oracle::circle_contour(2.0, 64);
    Contour b = a;
    std::reverse(b.points.begin(), b.points.end());
    auto [c1, c2] = align_contours(a, b);
    double residual = 0.0;
    for (std::size_t i = 0; i < c1.points.size(); ++i)
        residual += norm2(c1.points[i] - c2.points[i]);
    CHECK(residual == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("align on a rotated contour matches the exhaustive minimum") {
    Contour a = oracle::circle_contour(2.0, 48);
    // squash to an ellipse so rotation is not a pure reparametrization
    for (auto& p : a.points) p.y *= 0.5;
    Contour b = a;
    double ang = 30.0 * M_PI / 180.0;
    for (auto& p : b.points)
        p = {p.x * std::cos(ang) - p.y * std::sin(ang), p.x * std::sin(ang) + p.y * std::cos(ang)};

    auto [c1, c2] = align_contours(a, b);
    double got = 0.0;
    for (std::size_t i = 0; i < c1.points.size(); ++i) got += norm2(c1.points[i] - c2.points[i]);

    double best = std::numeric_limits<double>::infinity();
    std::size_t n = a.points.size();
    for (int flip = 0; flip < 2; ++flip)
        for (std::size_t s = 0; s < n; ++s) {
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = flip ? (n - ((i + s) % n)) % n : (i + s) % n;
                cost += norm2(a.points[i] - b.points[j]);
            }
            best = std::min(best, cost);
        }
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("linear homotopy endpoints are exact and the middle averages") {
    Contour a = oracle::circle_contour(1.0, 64);
    Contour b = oracle::circle_contour(3.0, 64);
    Contour h0 = linear_homotopy(a, b, 0.0);
    Contour h1 = linear_homotopy(a, b, 1.0);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(h0.points[i] == a.points[i]);
        CHECK(h1.points[i] == b.points[i]);
    }
    Contour mid = linear_homotopy(a, b, 0.5);
    for (const Vec2& p : mid.points) CHECK(norm(p) == doctest::Approx(2.0));
}

TEST_CASE("homotopy of aligned convex contours stays simple") {
    Contour a = oracle::circle_contour(1.0, 48);
    Contour b = oracle::circle_contour(2.5, 48, {0.8, -0.4});
    auto [c1, c2] = align_contours(a, b);
    for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        Contour h = linear_homotopy(c1, c2, u);
        // segment-intersection scan
        std::size_t n = h.points.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;  // shared endpoint
                Vec2 p = h.points[i], q = h.points[(i + 1) % n];
                Vec2 r = h.points[j], s = h.points[(j + 1) % n];
                double d1 = cross(q - p, r - p), d2 = cross(q - p, s - p);
                double d3 = cross(s - r, p - r), d4 = cross(s - r, q - r);
                bool crossing = ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
                CHECK_FALSE(crossing);
            }
    }
}

TEST_CASE("axis curves honor endpoints and tangents") {
    Vec3 p1{0, 0, 0}, p2{10, 0, 0};
    auto lin = axis_curve(p1, {1, 0, 0}, p2, {1, 0, 0}, AxisKind::linear, 33);
    CHECK(distance(lin[16], {5, 0, 0}) < 1e-12);

    // Hermite with matching collinear tangents degenerates to the line
    auto spl = axis_curve(p1, {1, 0, 0}, p2, {1, 0, 0}, AxisKind::spline, 33);
    for (std::size_t i = 0; i < spl.size(); ++i) CHECK(distance(spl[i], lin[i]) < 1e-9);

    // perpendicular end tangents: endpoints and end directions match
    auto bent = axis_curve(p1, {1, 0, 0}, p2, {0, 1, 0}, AxisKind::spline, 101);
    CHECK(distance(bent.front(), p1) < 1e-9);
    CHECK(distance(bent.back(), p2) < 1e-9);
    Vec3 t0 = normalized(bent[1] - bent[0]);
    Vec3 t1 = normalized(bent[100] - bent[99]);
    CHECK(dot(t0, Vec3{1, 0, 0}) > 0.99);
    CHECK(dot(t1, Vec3{0, 1, 0}) > 0.99);
    // curvature stays finite: no repeated points
    for (std::size_t i = 1; i < bent.size(); ++i) CHECK(distance(bent[i - 1], bent[i]) > 1e-9);

    auto sine = axis_curve(p1, {1, 0, 0}, p2, {1, 0, 0}, AxisKind::sine, 65);
    CHECK(distance(sine.front(), p1) < 1e-9);
    CHECK(distance(sine.back(), p2) < 1e-9);

    CHECK_THROWS_AS(axis_curve(p1, {1, 0, 0}, p1, {1, 0, 0}, AxisKind::linear, 16), Error);
}

TEST_CASE("generalized cylinder over equal circles matches the analytic solid") {
    GridShape grid;
    grid.dims = {60, 40, 40};
    grid.spacing = {1, 1, 1};
    PlaneFrame f = yz_frame({10, 20, 20});
    Contour c1 = circle_in_frame(10.0, 128, f);
    Contour c2 = circle_in_frame(10.0, 128, yz_frame({50, 20, 20}));
    std::vector<Vec3> axis{{10, 20, 20}, {50, 20, 20}};
    GeneralizedCylinder gc = generalized_cylinder(c1, c2, axis, grid, 0.5);
    auto truth = analytic_cylinder_voxels(grid, {10, 20, 20}, 10.0, 40.0);
    CHECK(iou(gc.voxels, truth) >= 0.95);
}

TEST_CASE("frustum mid-slice radius interpolates and frames stay orthonormal") {
    GridShape grid;
    grid.dims = {40, 32, 32};
    grid.spacing = {1, 1, 1};
    Contour c1 = circle_in_frame(2.0, 128, yz_frame({8, 16, 16}));
    Contour c2 = circle_in_frame(4.0, 128, yz_frame({28, 16, 16}));
    std::vector<Vec3> axis{{8, 16, 16}, {28, 16, 16}};
    GeneralizedCylinder gc = generalized_cylinder(c1, c2, axis, grid, 0.5);

    for (const PlaneFrame& f : gc.frames) {
        CHECK(std::abs(dot(f.u, f.u) - 1.0) <= 1e-9);
        CHECK(std::abs(dot(f.v, f.v) - 1.0) <= 1e-9);
        CHECK(std::abs(dot(f.normal, f.normal) - 1.0) <= 1e-9);
        CHECK(std::abs(dot(f.u, f.v)) <= 1e-9);
        CHECK(std::abs(dot(f.u, f.normal)) <= 1e-9);
        CHECK(std::abs(dot(f.v, f.normal)) <= 1e-9);
    }

    // mid-axis slice: radius 3 within voxelization tolerance
    double max_r = 0.0;
    for (std::size_t v : gc.voxels) {
        Vec3i c = grid.coords(v);
        if (c.x == 18) max_r = std::max(max_r, std::hypot(c.y - 16.0, c.z - 16.0));
    }
    CHECK(max_r == doctest::Approx(3.0).epsilon(0.25));

    // end slices reproduce the contours within half a voxel
    for (std::size_t v : gc.voxels) {
        Vec3i c = grid.coords(v);
        if (c.x == 8) CHECK(std::hypot(c.y - 16.0, c.z - 16.0) <= 2.5);
        if (c.x == 28) CHECK(std::hypot(c.y - 16.0, c.z - 16.0) <= 4.5);
    }
}

TEST_CASE("frame transport flags discontinuities on kinked axes") {
    GridShape grid;
    grid.dims = {40, 40, 40};
    grid.spacing = {1, 1, 1};
    Contour c1 = circle_in_frame(3.0, 64, yz_frame({5, 20, 20}));
    Contour c2 = circle_in_frame(3.0, 64, yz_frame({5, 35, 20}));
    // hairpin: direction reverses within one du step
    std::vector<Vec3> axis{{5, 20, 20}, {5.5, 20, 20}, {5, 20.2, 20}, {5, 35, 20}};
    CHECK_THROWS_WITH_AS(generalized_cylinder(c1, c2, axis, grid, 0.5),
                         doctest::Contains("45"), Error);
}

TEST_CASE("cut object on the crossing fixture: four parts and one intersection") {
    Vec3i dims{128, 128, 64};
    SynthScene scene = rasterize_scene(presets::x_crossing(dims, 7.0), dims);
    RunConfig cfg;
    DecompositionResult r = decompose(scene.volume, cfg);
    CHECK(r.n_parts == 4);
    CHECK(r.n_intersections == 1);
    CHECK(r.criticals.size() == 4);
    CHECK(r.m == 2);
}

TEST_CASE("single tube passes through as one component") {
    Vec3i dims{100, 32, 32};
    SynthScene scene = rasterize_scene(presets::straight_tube(dims, 6.0), dims);
    RunConfig cfg;
    DecompositionResult r = decompose(scene.volume, cfg);
    CHECK(r.m == 1);
    CHECK(r.labels.max_label() == 1);
    for (std::size_t i = 0; i < scene.volume.data.size(); ++i)
        CHECK((scene.volume.data[i] != 0) == (r.labels.data[i] != 0));
}

TEST_CASE("x crossing decomposes into two components with solid overlap") {
    Vec3i dims{128, 128, 64};
    SynthScene scene = rasterize_scene(presets::x_crossing(dims, 7.0), dims);
    RunConfig cfg;
    DecompositionResult r = decompose(scene.volume, cfg);
    REQUIRE(r.labels.max_label() == 2);
    for (std::uint32_t label : {1u, 2u}) {
        std::vector<std::size_t> pred, truth;
        for (std::size_t i = 0; i < r.labels.data.size(); ++i) {
            if (r.labels.data[i] == label) pred.push_back(i);
            if (scene.ground_truth.data[i] == label) truth.push_back(i);
        }
        CHECK(iou(pred, truth) >= 0.9);
    }
    // every foreground voxel is labeled
    for (std::size_t i = 0; i < scene.volume.data.size(); ++i)
        if (scene.volume.data[i]) CHECK(r.labels.data[i] != 0);
}

TEST_CASE("weave-like scene: three components from seven parts") {
    Vec3i dims{400, 200, 48};
    SynthScene scene = rasterize_scene(presets::weave(dims, 6.0), dims);
    RunConfig cfg;
    DecompositionResult r = decompose(scene.volume, cfg);
    CHECK(r.m == 3);
    CHECK(r.labels.max_label() == 3);
    CHECK(r.n_parts == 7);
    CHECK(r.n_intersections == 2);
}

TEST_CASE("decompose is deterministic") {
    Vec3i dims{96, 96, 48};
    SynthScene scene = rasterize_scene(presets::x_crossing(dims, 6.0), dims);
    RunConfig cfg;
    DecompositionResult a = decompose(scene.volume, cfg);
    DecompositionResult b = decompose(scene.volume, cfg);
    CHECK(a.labels.data == b.labels.data);
    CHECK(a.provenance == b.provenance);
}

TEST_CASE("errors carry their stage name") {
    BinaryVolume vol({16, 16, 16});
    vol.set(2, 2, 2, true);
    vol.set(12, 12, 12, true);
    RunConfig cfg;
    CHECK_THROWS_WITH_AS(decompose(vol, cfg), doctest::Contains("skeleton stage"), Error);
}

}  // TEST_SUITE
