#pragma once

// Test-only reference implementations, kept independent of the library's
// algorithms so they can serve as oracles.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "csd/sweep.hpp"
#include "csd/volume.hpp"

namespace oracle {

// Brute-force exact distance transform: min distance to any background
// voxel center, scanning every pair.
inline csd::ScalarField brute_distance(const csd::BinaryVolume& vol) {
    const csd::GridShape& g = vol.grid;
    csd::ScalarField out(g.dims, g.spacing);
    std::vector<csd::Vec3> background;
    for (std::size_t i = 0; i < vol.data.size(); ++i)
        if (!vol.data[i]) {
            csd::Vec3i c = g.coords(i);
            background.push_back(g.world(c.x, c.y, c.z));
        }
    for (std::size_t i = 0; i < vol.data.size(); ++i) {
        if (!vol.data[i]) {
            out.data[i] = 0.0;
            continue;
        }
        csd::Vec3i c = g.coords(i);
        csd::Vec3 p = g.world(c.x, c.y, c.z);
        double best = std::numeric_limits<double>::infinity();
        for (const csd::Vec3& b : background) best = std::min(best, csd::norm2(p - b));
        out.data[i] = std::sqrt(best);
    }
    return out;
}

// Recursive-style flood fill count (stack based), independent of the
// library's component labeling.
inline int flood_fill_count(const csd::BinaryVolume& vol, bool diag) {
    const csd::GridShape& g = vol.grid;
    std::vector<char> seen(g.voxel_count(), 0);
    int count = 0;
    for (std::size_t start = 0; start < vol.data.size(); ++start) {
        if (!vol.data[start] || seen[start]) continue;
        ++count;
        std::vector<std::size_t> stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            csd::Vec3i c = g.coords(stack.back());
            stack.pop_back();
            for (int dz = -1; dz <= 1; ++dz)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0 && dz == 0) continue;
                        if (!diag && std::abs(dx) + std::abs(dy) + std::abs(dz) != 1) continue;
                        int x = c.x + dx, y = c.y + dy, z = c.z + dz;
                        if (!g.contains(x, y, z)) continue;
                        std::size_t i = g.index(x, y, z);
                        if (vol.data[i] && !seen[i]) {
                            seen[i] = 1;
                            stack.push_back(i);
                        }
                    }
        }
    }
    return count;
}

// Plain double-loop point-set Hausdorff.
inline double hausdorff_pairs(const std::vector<csd::Vec2>& a, const std::vector<csd::Vec2>& b) {
    auto directed = [](const std::vector<csd::Vec2>& p, const std::vector<csd::Vec2>& q) {
        double sup = 0.0;
        for (const auto& x : p) {
            double inf = std::numeric_limits<double>::infinity();
            for (const auto& y : q) inf = std::min(inf, csd::distance(x, y));
            sup = std::max(sup, inf);
        }
        return sup;
    };
    return std::max(directed(a, b), directed(b, a));
}

// Pair-counting Rand error over the union of nonzero supports.
inline double rand_error_pairs(const csd::LabelVolume& a, const csd::LabelVolume& b) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> items;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] || b.data[i]) items.emplace_back(a.data[i], b.data[i]);
    if (items.size() < 2) return 0.0;
    double disagree = 0.0, total = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            bool same_a = items[i].first == items[j].first;
            bool same_b = items[i].second == items[j].second;
            if (same_a != same_b) disagree += 1.0;
            total += 1.0;
        }
    return disagree / total;
}

// Histogram-based variation of information.
inline double voi_hist(const csd::LabelVolume& a, const csd::LabelVolume& b) {
    std::map<std::uint32_t, double> pa, pb;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> pj;
    double n = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        if (!a.data[i] && !b.data[i]) continue;
        pa[a.data[i]] += 1;
        pb[b.data[i]] += 1;
        pj[{a.data[i], b.data[i]}] += 1;
        n += 1;
    }
    if (n == 0) return 0.0;
    double ha = 0, hb = 0, hj = 0;
    for (auto& [k, v] : pa) ha -= v / n * std::log(v / n);
    for (auto& [k, v] : pb) hb -= v / n * std::log(v / n);
    for (auto& [k, v] : pj) hj -= v / n * std::log(v / n);
    return 2 * hj - ha - hb;
}

// Exhaustive nearest-boundary mean distance; boundary faces between
// differently labeled nonzero voxels, symmetric mean.
inline double boundary_error_brute(const csd::LabelVolume& a, const csd::LabelVolume& b) {
    const csd::GridShape& g = a.grid;
    auto faces = [&](const csd::LabelVolume& v) {
        std::vector<csd::Vec3> out;
        const int off[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        for (int z = 0; z < g.dims.z; ++z)
            for (int y = 0; y < g.dims.y; ++y)
                for (int x = 0; x < g.dims.x; ++x) {
                    std::uint32_t l = v.at(x, y, z);
                    if (!l) continue;
                    for (auto& o : off) {
                        int nx = x + o[0], ny = y + o[1], nz = z + o[2];
                        if (!g.contains(nx, ny, nz)) continue;
                        std::uint32_t ln = v.at(nx, ny, nz);
                        if (ln && ln != l)
                            out.push_back({(x + 0.5 * o[0]) * g.spacing.x,
                                           (y + 0.5 * o[1]) * g.spacing.y,
                                           (z + 0.5 * o[2]) * g.spacing.z});
                    }
                }
        return out;
    };
    auto fa = faces(a), fb = faces(b);
    if (fa.empty() || fb.empty()) return 0.0;
    auto directed = [](const std::vector<csd::Vec3>& from, const std::vector<csd::Vec3>& to) {
        double acc = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, csd::distance(p, q));
            acc += best;
        }
        return acc / double(from.size());
    };
    return 0.5 * (directed(fa, fb) + directed(fb, fa));
}

// Random blob volume: a few spheres stamped into a small grid.
inline csd::BinaryVolume random_blobs(csd::Vec3i dims, int n_blobs, std::uint64_t seed) {
    csd::BinaryVolume vol(dims);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0, dims.x - 1), uy(0, dims.y - 1), uz(0, dims.z - 1);
    std::uniform_real_distribution<double> ur(1.0, std::min({dims.x, dims.y, dims.z}) / 4.0);
    for (int b = 0; b < n_blobs; ++b) {
        csd::Vec3 c{ux(rng), uy(rng), uz(rng)};
        double r = ur(rng);
        for (int z = 0; z < dims.z; ++z)
            for (int y = 0; y < dims.y; ++y)
                for (int x = 0; x < dims.x; ++x)
                    if (csd::distance({double(x), double(y), double(z)}, c) <= r)
                        vol.set(x, y, z, true);
    }
    return vol;
}

// Random labeling over a given support.
inline csd::LabelVolume random_labels(const csd::BinaryVolume& support, int n_labels,
                                      std::uint64_t seed) {
    csd::LabelVolume out(support.grid.dims, support.grid.spacing);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> ul(1, n_labels);
    for (std::size_t i = 0; i < support.data.size(); ++i)
        if (support.data[i]) out.data[i] = std::uint32_t(ul(rng));
    return out;
}

// V - E + F over a triangle mesh with shared vertices.
inline long euler_characteristic(const csd::TriangleMesh& mesh) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            std::uint32_t u = t[std::size_t(k)], v = t[std::size_t((k + 1) % 3)];
            edges.insert({std::min(u, v), std::max(u, v)});
        }
    return long(mesh.vertices.size()) - long(edges.size()) + long(mesh.triangles.size());
}

inline double mesh_area(const csd::TriangleMesh& mesh) {
    double area = 0.0;
    for (const auto& t : mesh.triangles) {
        const csd::Vec3& a = mesh.vertices[t[0]];
        const csd::Vec3& b = mesh.vertices[t[1]];
        const csd::Vec3& c = mesh.vertices[t[2]];
        area += 0.5 * csd::norm(csd::cross(b - a, c - a));
    }
    return area;
}

// Regular polygon contour in a default frame.
inline csd::Contour circle_contour(double radius, int n, csd::Vec2 center = {0, 0}) {
    csd::Contour c;
    c.frame.origin = {0, 0, 0};
    c.frame.u = {1, 0, 0};
    c.frame.v = {0, 1, 0};
    c.frame.normal = {0, 0, 1};
    c.points.resize(std::size_t(n));
    for (int k = 0; k < n; ++k) {
        double a = 2.0 * M_PI * k / n;
        c.points[std::size_t(k)] = {center.x + radius * std::cos(a), center.y + radius * std::sin(a)};
    }
    return c;
}

}  // namespace oracle
