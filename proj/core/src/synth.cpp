#include <algorithm>
#include <cmath>
#include <fstream>

#include "csd/synth.hpp"
#include "json.hpp"

namespace csd {

using nlohmann::json;

namespace {

struct AxisGeometry {
    std::vector<Vec3> pts;
    std::vector<double> cum;  // cumulative arc length per point
    double total = 0.0;
};

AxisGeometry axis_geometry(const std::vector<Vec3>& pts) {
    AxisGeometry g;
    g.pts = pts;
    g.cum.resize(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        g.cum[i] = g.cum[i - 1] + distance(pts[i - 1], pts[i]);
    g.total = g.cum.empty() ? 0.0 : g.cum.back();
    return g;
}

// Nearest point on the axis; returns distance and arc-length position.
void nearest_on_axis(const AxisGeometry& g, const Vec3& p, double& best_d, double& best_s) {
    best_d = std::numeric_limits<double>::infinity();
    best_s = 0.0;
    for (std::size_t i = 0; i + 1 < g.pts.size(); ++i) {
        Vec3 a = g.pts[i], b = g.pts[i + 1];
        Vec3 ab = b - a;
        double len2 = norm2(ab);
        double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
        double d = distance(p, a + ab * t);
        if (d < best_d) {
            best_d = d;
            best_s = g.cum[i] + t * std::sqrt(len2);
        }
    }
    if (g.pts.size() == 1) {
        best_d = distance(p, g.pts[0]);
        best_s = 0.0;
    }
}

double radius_at(const TubeSpec& spec, double s, double total) {
    if (spec.radius_end < 0.0 || total <= 0.0) return spec.radius_start;
    return spec.radius_start + (spec.radius_end - spec.radius_start) * (s / total);
}

}  // namespace

SynthScene rasterize_scene(const std::vector<TubeSpec>& specs, Vec3i dims, Vec3 spacing) {
    if (specs.empty()) throw Error("scene has no tubes");

    SynthScene scene;
    scene.volume = BinaryVolume(dims, spacing);
    scene.ground_truth = LabelVolume(dims, spacing);
    const GridShape& grid = scene.volume.grid;

    std::vector<AxisGeometry> axes;
    axes.reserve(specs.size());
    Vec3 world_max{(dims.x - 1) * spacing.x, (dims.y - 1) * spacing.y, (dims.z - 1) * spacing.z};
    double min_sp = grid.min_spacing();

    for (std::size_t ti = 0; ti < specs.size(); ++ti) {
        const TubeSpec& spec = specs[ti];
        if (spec.axis.size() < 2) throw Error("tube axis needs at least two control points");
        double rmin = spec.radius_end < 0.0 ? spec.radius_start
                                            : std::min(spec.radius_start, spec.radius_end);
        double rmax = spec.radius_end < 0.0 ? spec.radius_start
                                            : std::max(spec.radius_start, spec.radius_end);
        if (rmin <= 1.5 * min_sp)
            throw Error("tube radius " + std::to_string(rmin) + " is below the 1.5-voxel floor");
        for (const Vec3& p : spec.axis) {
            if (p.x < rmax || p.y < rmax || p.z < rmax || p.x > world_max.x - rmax ||
                p.y > world_max.y - rmax || p.z > world_max.z - rmax)
                throw Error("tube axis leaves the volume bounds (one-radius margin required)");
        }
        axes.push_back(axis_geometry(spec.axis));
        scene.axes.push_back(spec.axis);
    }

    std::vector<double> best_axis_d(grid.voxel_count(), std::numeric_limits<double>::infinity());

    for (std::size_t ti = 0; ti < specs.size(); ++ti) {
        const TubeSpec& spec = specs[ti];
        const AxisGeometry& ax = axes[ti];
        double rmax = std::max(spec.radius_start, std::max(spec.radius_end, 0.0));

        // Inflated bounding box of the axis keeps the scan local.
        Vec3 lo = ax.pts[0], hi = ax.pts[0];
        for (const Vec3& p : ax.pts) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        int x0 = std::max(0, int(std::floor((lo.x - rmax) / spacing.x)));
        int y0 = std::max(0, int(std::floor((lo.y - rmax) / spacing.y)));
        int z0 = std::max(0, int(std::floor((lo.z - rmax) / spacing.z)));
        int x1 = std::min(dims.x - 1, int(std::ceil((hi.x + rmax) / spacing.x)));
        int y1 = std::min(dims.y - 1, int(std::ceil((hi.y + rmax) / spacing.y)));
        int z1 = std::min(dims.z - 1, int(std::ceil((hi.z + rmax) / spacing.z)));

        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    Vec3 p = grid.world(x, y, z);
                    double d, s;
                    nearest_on_axis(ax, p, d, s);
                    if (d > radius_at(spec, s, ax.total)) continue;
                    std::size_t i = grid.index(x, y, z);
                    scene.volume.data[i] = 1;
                    if (d < best_axis_d[i]) {
                        best_axis_d[i] = d;
                        scene.ground_truth.data[i] = spec.label;
                    }
                }
    }
    return scene;
}

std::vector<TubeSpec> load_scene_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scene spec: " + path);
    json j = json::parse(in, nullptr, true, true);
    std::vector<TubeSpec> specs;
    std::uint32_t next_label = 1;
    for (const auto& jt : j.at("tubes")) {
        TubeSpec spec;
        for (const auto& jp : jt.at("points"))
            spec.axis.push_back({jp[0].get<double>(), jp[1].get<double>(), jp[2].get<double>()});
        if (jt.at("radius").is_array()) {
            spec.radius_start = jt["radius"][0].get<double>();
            spec.radius_end = jt["radius"][1].get<double>();
        } else {
            spec.radius_start = jt["radius"].get<double>();
        }
        spec.label = jt.value("label", next_label);
        next_label = std::max(next_label, spec.label) + 1;
        specs.push_back(std::move(spec));
    }
    return specs;
}

void load_scene_header(const std::string& path, Vec3i& dims, Vec3& spacing) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scene spec: " + path);
    json j = json::parse(in, nullptr, true, true);
    const auto& jd = j.at("dims");
    dims = {jd[0].get<int>(), jd[1].get<int>(), jd[2].get<int>()};
    spacing = {1, 1, 1};
    if (j.contains("spacing"))
        spacing = {j["spacing"][0].get<double>(), j["spacing"][1].get<double>(), j["spacing"][2].get<double>()};
}

void save_scene_spec(const std::vector<TubeSpec>& specs, Vec3i dims, Vec3 spacing,
                     const std::string& path) {
    json j;
    j["dims"] = {dims.x, dims.y, dims.z};
    j["spacing"] = {spacing.x, spacing.y, spacing.z};
    j["tubes"] = json::array();
    for (const TubeSpec& s : specs) {
        json jt;
        jt["points"] = json::array();
        for (const Vec3& p : s.axis) jt["points"].push_back({p.x, p.y, p.z});
        if (s.radius_end < 0.0)
            jt["radius"] = s.radius_start;
        else
            jt["radius"] = {s.radius_start, s.radius_end};
        jt["label"] = s.label;
        j["tubes"].push_back(std::move(jt));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write scene spec: " + path);
    out << j.dump(2) << "\n";
}

namespace presets {

std::vector<TubeSpec> straight_tube(Vec3i dims, double r) {
    double m = r + 2.0;
    double cy = (dims.y - 1) / 2.0, cz = (dims.z - 1) / 2.0;
    return {{{{m, cy, cz}, {dims.x - 1 - m, cy, cz}}, r, -1.0, 1}};
}

std::vector<TubeSpec> x_crossing(Vec3i dims, double r) {
    double m = r + 2.0;
    double cx = (dims.x - 1) / 2.0, cy = (dims.y - 1) / 2.0, cz = (dims.z - 1) / 2.0;
    return {
        {{{m, cy, cz}, {dims.x - 1 - m, cy, cz}}, r, -1.0, 1},
        {{{cx, m, cz}, {cx, dims.y - 1 - m, cz}}, r, -1.0, 2},
    };
}

std::vector<TubeSpec> t_junction(Vec3i dims, double r) {
    double m = r + 2.0;
    double cx = (dims.x - 1) / 2.0, cy = (dims.y - 1) / 2.0, cz = (dims.z - 1) / 2.0;
    return {
        {{{m, cy, cz}, {dims.x - 1 - m, cy, cz}}, r, -1.0, 1},
        {{{cx, cy, cz}, {cx, m, cz}}, r, -1.0, 2},
    };
}

std::vector<TubeSpec> weave(Vec3i dims, double r) {
    // One long trunk plus two crossing tubes, scaled to the grid.
    double sx = (dims.x - 1) / 800.0, sy = (dims.y - 1) / 400.0, sz = (dims.z - 1) / 70.0;
    auto at = [&](double x, double y, double z) { return Vec3{x * sx, y * sy, z * sz}; };
    return {
        {{at(40, 150, 35), at(760, 150, 35)}, r, -1.0, 1},
        {{at(150, 40, 35), at(400, 268, 35)}, r, -1.0, 2},
        {{at(480, 268, 35), at(730, 40, 35)}, r, -1.0, 3},
    };
}

std::vector<TubeSpec> five_branch(Vec3i dims, double r) {
    // Straight trunk with a bent two-segment arm and one oblique arm:
    // five skeleton branches, two junctions. Designed for a 128^3 grid.
    double s = (std::min(dims.x, std::min(dims.y, dims.z)) - 1) / 127.0;
    Vec3 j1{64, 64, 60};
    Vec3 d3{std::sin(140.0 * M_PI / 180.0), 0.0, std::cos(140.0 * M_PI / 180.0)};
    Vec3 j2 = j1 + d3 * 40.0;
    // arm continuation bent 60 degrees back toward +x, in the xz plane
    double a4 = -50.0 + 60.0;  // d3 sits at -50 degrees from +x in xz
    Vec3 d4{std::cos(a4 * M_PI / 180.0), 0.0, std::sin(a4 * M_PI / 180.0)};
    // oblique arm, 80 degrees off d3 and out of plane
    Vec3 d5 = d3 * std::cos(80.0 * M_PI / 180.0) + Vec3{0, -1, 0} * std::sin(80.0 * M_PI / 180.0);
    auto sc = [&](const Vec3& p) { return p * s; };
    return {
        {{sc({64, 64, 10}), sc({64, 64, 110})}, r, -1.0, 1},
        {{sc(j1), sc(j2)}, r, -1.0, 2},
        {{sc(j2), sc(j2 + d4 * 30.0)}, r, -1.0, 3},
        {{sc(j2), sc(j2 + d5 * 30.0)}, r, -1.0, 4},
    };
}

std::vector<TubeSpec> four_leg(Vec3i dims, double body_r, double leg_r) {
    // legs splay in y only so each pair shares one degree-4 junction
    double sx = (dims.x - 1) / 127.0, sy = (dims.y - 1) / 63.0, sz = (dims.z - 1) / 63.0;
    auto at = [&](double x, double y, double z) { return Vec3{x * sx, y * sy, z * sz}; };
    return {
        {{at(20, 32, 44), at(108, 32, 44)}, body_r, -1.0, 1},
        {{at(40, 32, 44), at(40, 16, 10)}, leg_r, -1.0, 2},
        {{at(40, 32, 44), at(40, 48, 10)}, leg_r, -1.0, 3},
        {{at(80, 32, 44), at(80, 16, 10)}, leg_r, -1.0, 4},
        {{at(80, 32, 44), at(80, 48, 10)}, leg_r, -1.0, 5},
    };
}

std::vector<TubeSpec> tapered_tube(Vec3i dims, double r0, double r1) {
    double m = std::max(r0, r1) + 2.0;
    double cy = (dims.y - 1) / 2.0, cz = (dims.z - 1) / 2.0;
    return {{{{m, cy, cz}, {dims.x - 1 - m, cy, cz}}, r0, r1, 1}};
}

}  // namespace presets

}  // namespace csd
