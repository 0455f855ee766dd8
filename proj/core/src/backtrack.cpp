#include <cmath>
#include <sstream>

#include "csd/skeleton.hpp"

namespace csd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-voxel gradient by central differences, one-sided where a neighbor is
// unreachable; zero along axes with no usable neighbor.
Vec3 voxel_gradient(const ScalarField& u, int x, int y, int z) {
    const GridShape& g = u.grid;
    double center = u.data[g.index(x, y, z)];
    if (!(center < kInf)) return {0, 0, 0};
    Vec3 grad{0, 0, 0};
    const int c[3] = {x, y, z};
    const double h[3] = {g.spacing.x, g.spacing.y, g.spacing.z};
    double out[3] = {0, 0, 0};
    for (int ax = 0; ax < 3; ++ax) {
        int lo[3] = {c[0], c[1], c[2]}, hi[3] = {c[0], c[1], c[2]};
        lo[ax] -= 1;
        hi[ax] += 1;
        double vlo = g.contains(lo[0], lo[1], lo[2]) ? u.data[g.index(lo[0], lo[1], lo[2])] : kInf;
        double vhi = g.contains(hi[0], hi[1], hi[2]) ? u.data[g.index(hi[0], hi[1], hi[2])] : kInf;
        bool has_lo = vlo < kInf, has_hi = vhi < kInf;
        if (has_lo && has_hi)
            out[ax] = (vhi - vlo) / (2.0 * h[ax]);
        else if (has_hi)
            out[ax] = (vhi - center) / h[ax];
        else if (has_lo)
            out[ax] = (center - vlo) / h[ax];
    }
    grad = {out[0], out[1], out[2]};
    return grad;
}

// Trilinear blend of voxel gradients over reachable corners.
Vec3 sample_gradient(const ScalarField& u, const Vec3& p) {
    const GridShape& g = u.grid;
    Vec3 gc = g.to_grid(p);
    int x0 = int(std::floor(gc.x)), y0 = int(std::floor(gc.y)), z0 = int(std::floor(gc.z));
    double fx = gc.x - x0, fy = gc.y - y0, fz = gc.z - z0;
    Vec3 acc{0, 0, 0};
    double wsum = 0.0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                int x = x0 + dx, y = y0 + dy, z = z0 + dz;
                double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) * (dz ? fz : 1.0 - fz);
                if (w == 0.0 || !g.contains(x, y, z)) continue;
                if (!(u.data[g.index(x, y, z)] < kInf)) continue;
                acc += voxel_gradient(u, x, y, z) * w;
                wsum += w;
            }
    return wsum > 0.0 ? acc / wsum : Vec3{0, 0, 0};
}

// Smallest-arrival voxel center in the 3x3x3 neighborhood of p with a
// value strictly below `below`; FMM causality guarantees one exists at
// every non-seed voxel, which makes this a safe fallback when the
// continuous descent stalls in flat valleys.
std::optional<Vec3> descending_voxel(const ScalarField& u, const Vec3& p, double below) {
    const GridShape& g = u.grid;
    Vec3 gc = g.to_grid(p);
    int cx = int(std::lround(gc.x)), cy = int(std::lround(gc.y)), cz = int(std::lround(gc.z));
    double best = below;
    std::optional<Vec3> out;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int x = cx + dx, y = cy + dy, z = cz + dz;
                if (!g.contains(x, y, z)) continue;
                double v = u.data[g.index(x, y, z)];
                if (v < best) {
                    best = v;
                    out = g.world(x, y, z);
                }
            }
    return out;
}

// Zero-arrival voxel center within radius of p, or nullopt.
std::optional<Vec3> near_zero_voxel(const ScalarField& u, const Vec3& p, double radius) {
    const GridShape& g = u.grid;
    Vec3 gc = g.to_grid(p);
    int cx = int(std::lround(gc.x)), cy = int(std::lround(gc.y)), cz = int(std::lround(gc.z));
    std::optional<Vec3> best;
    double best_d = radius;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int x = cx + dx, y = cy + dy, z = cz + dz;
                if (!g.contains(x, y, z)) continue;
                if (u.data[g.index(x, y, z)] != 0.0) continue;
                Vec3 c = g.world(x, y, z);
                double d = distance(p, c);
                if (d <= best_d) {
                    best_d = d;
                    best = c;
                }
            }
    return best;
}

}  // namespace

void Polyline::push_back(const Vec3& p) {
    if (!points.empty() && distance(points.back(), p) < 1e-12) return;
    double a = points.empty() ? 0.0 : arc.back() + distance(points.back(), p);
    points.push_back(p);
    arc.push_back(a);
}

void Polyline::reverse() {
    std::reverse(points.begin(), points.end());
    double total = length();
    std::vector<double> na(arc.size());
    for (std::size_t i = 0; i < arc.size(); ++i) na[i] = total - arc[arc.size() - 1 - i];
    arc = std::move(na);
}

Polyline backtrack(const ScalarField& arrival, const Vec3& start, double step_voxels) {
    const GridShape& g = arrival.grid;
    double u0 = arrival.sample(start);
    if (!(u0 < kInf)) throw Error("backtrack: start has no finite arrival");

    double step = step_voxels * g.min_spacing();
    double snap_radius = 0.5 * g.min_spacing();

    Polyline poly;
    poly.push_back(start);
    double emitted_u = u0;

    Vec3 p = start;
    double prev_u = u0;
    int stagnant = 0;
    // generous cap; a healthy trace needs ~(domain diameter / step) moves
    long max_steps = 400 + long(40.0 * (g.dims.x + g.dims.y + g.dims.z) / step_voxels);

    for (long iter = 0; iter < max_steps; ++iter) {
        if (auto snap = near_zero_voxel(arrival, p, snap_radius)) {
            poly.push_back(*snap);
            return poly;
        }

        Vec3 dir = -sample_gradient(arrival, p);
        double dn = norm(dir);
        if (dn > 0.0) {
            dir = dir / dn;
            // midpoint-averaged direction keeps the trace in flat valleys
            Vec3 trial = p + dir * step;
            Vec3 dir2 = -sample_gradient(arrival, trial);
            double dn2 = norm(dir2);
            if (dn2 > 0.0) {
                Vec3 avg = dir + dir2 / dn2;
                double an = norm(avg);
                if (an > 1e-9) dir = avg / an;
            }
        }
        Vec3 pn = p;
        double un = prev_u;
        bool moved = false;
        if (dn > 0.0) {
            pn = p + dir * step;
            un = arrival.sample(pn);
            moved = un < prev_u;
        }
        if (!moved) {
            // flat valley or interpolation dimple: drop to the smallest
            // neighboring voxel, which always descends off the seed set
            if (auto q = descending_voxel(arrival, p, prev_u)) {
                pn = *q;
                un = arrival.sample(pn);
                moved = true;
            }
        }
        if (moved) {
            stagnant = 0;
            p = pn;
            prev_u = un;
            if (un < emitted_u) {
                poly.push_back(p);
                emitted_u = un;
            }
        } else {
            ++stagnant;
        }
        if (stagnant > 20) {
            std::ostringstream msg;
            msg << "backtrack: arrival not decreasing for more than 20 steps near (" << p.x << ", "
                << p.y << ", " << p.z << ")";
            throw Error(msg.str());
        }
    }
    throw Error("backtrack: step limit exceeded without reaching a zero-arrival point");
}

}  // namespace csd
