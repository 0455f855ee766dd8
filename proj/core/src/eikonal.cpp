#include <algorithm>
#include <cmath>
#include <queue>

#include "csd/skeleton.hpp"

namespace csd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlownessFloor = 1e-6;
// The exploration wave divides by F, so its floor bounds the premium on
// deep (F ~ 0) voxels: big enough to rank deep voxels last among equals,
// small enough that a near-seed pocket of ties cannot outrank a far end.
constexpr double kExplorationFloor = 0.05;

// Upwind quadratic update at one voxel: solve sum_i ((u - a_i)^+ / h_i)^2 = s^2
// over the axis minima a_i of the accepted neighbors.
double quadratic_update(const double a[3], const double h[3], double slowness) {
    // sort axes by their minimum value
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int i, int j) { return a[i] < a[j]; });

    double u = kInf;
    double sum_w = 0.0, sum_wa = 0.0, sum_wa2 = 0.0;
    for (int k = 0; k < 3; ++k) {
        int i = order[k];
        if (a[i] == kInf) break;
        double w = 1.0 / (h[i] * h[i]);
        sum_w += w;
        sum_wa += w * a[i];
        sum_wa2 += w * a[i] * a[i];
        // candidate solution using the first k+1 axes
        double A = sum_w, B = -2.0 * sum_wa, C = sum_wa2 - slowness * slowness;
        double disc = B * B - 4.0 * A * C;
        if (disc < 0.0) continue;
        double cand = (-B + std::sqrt(disc)) / (2.0 * A);
        // valid when the candidate exceeds every participating minimum
        if (k + 1 < 3 && cand > a[order[k + 1]]) continue;
        if (cand >= a[i]) u = std::min(u, cand);
    }
    if (u == kInf && a[order[0]] < kInf) {
        // fall back to the one-axis update
        u = a[order[0]] + slowness * h[order[0]];
    }
    return u;
}

// The heap orders by (value, index) so runs are reproducible.
struct HeapEntry {
    double value;
    std::size_t index;
    bool operator>(const HeapEntry& o) const {
        return value != o.value ? value > o.value : index > o.index;
    }
};

ScalarField fast_march(const CostField& cost, std::span<const std::size_t> seed_voxels,
                       bool reciprocal) {
    const GridShape& g = cost.f.grid;
    ScalarField u(g.dims, g.spacing, kInf);

    auto slowness_at = [&](std::size_t i) -> double {
        double f = cost.f.data[i];
        if (!(f < kInf)) return kInf;  // background
        if (reciprocal) return 1.0 / std::max(f, kExplorationFloor);
        return std::max(f, kSlownessFloor);
    };

    std::vector<std::uint8_t> frozen(g.voxel_count(), 0);
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;

    if (seed_voxels.empty()) throw Error("solve_eikonal: empty seed set");
    for (std::size_t i : seed_voxels) {
        if (!(cost.f.data[i] < kInf)) throw Error("solve_eikonal: seed off the foreground");
        u.data[i] = 0.0;
        heap.push({0.0, i});
    }

    const double h[3] = {g.spacing.x, g.spacing.y, g.spacing.z};
    const std::ptrdiff_t stride[3] = {1, std::ptrdiff_t(g.dims.x),
                                      std::ptrdiff_t(g.dims.x) * g.dims.y};

    while (!heap.empty()) {
        HeapEntry top = heap.top();
        heap.pop();
        if (frozen[top.index]) continue;
        frozen[top.index] = 1;

        Vec3i c = g.coords(top.index);
        const int cc[3] = {c.x, c.y, c.z};
        for (int axis = 0; axis < 3; ++axis)
            for (int dir = -1; dir <= 1; dir += 2) {
                int nc[3] = {cc[0], cc[1], cc[2]};
                nc[axis] += dir;
                if (!g.contains(nc[0], nc[1], nc[2])) continue;
                std::size_t ni = g.index(nc[0], nc[1], nc[2]);
                if (frozen[ni]) continue;
                double s = slowness_at(ni);
                if (s == kInf) continue;

                double a[3];
                for (int ax = 0; ax < 3; ++ax) {
                    double lo = kInf, hi = kInf;
                    if (nc[ax] > 0) {
                        std::size_t j = std::size_t(std::ptrdiff_t(ni) - stride[ax]);
                        if (frozen[j]) lo = u.data[j];
                    }
                    int lim = ax == 0 ? g.dims.x : (ax == 1 ? g.dims.y : g.dims.z);
                    if (nc[ax] + 1 < lim) {
                        std::size_t j = std::size_t(std::ptrdiff_t(ni) + stride[ax]);
                        if (frozen[j]) hi = u.data[j];
                    }
                    a[ax] = std::min(lo, hi);
                }
                double cand = quadratic_update(a, h, s);
                if (cand < u.data[ni]) {
                    u.data[ni] = cand;
                    heap.push({cand, ni});
                }
            }
    }
    return u;
}

std::vector<std::size_t> seeds_to_voxels(const GridShape& g, std::span<const Vec3> seeds) {
    std::vector<std::size_t> out;
    out.reserve(seeds.size());
    for (const Vec3& s : seeds) {
        Vec3 gc = g.to_grid(s);
        int x = int(std::lround(gc.x)), y = int(std::lround(gc.y)), z = int(std::lround(gc.z));
        if (!g.contains(x, y, z)) throw Error("solve_eikonal: seed outside the grid");
        out.push_back(g.index(x, y, z));
    }
    return out;
}

}  // namespace

CostField speed_cost(const ScalarField& dfield) {
    const GridShape& g = dfield.grid;
    CostField cost;
    cost.f = ScalarField(g.dims, g.spacing, kInf);

    double dmax = 0.0;
    std::size_t arg = 0;
    bool any = false;
    for (std::size_t i = 0; i < dfield.data.size(); ++i) {
        double d = dfield.data[i];
        if (d > 0.0 && d > dmax) {
            dmax = d;
            arg = i;
            any = true;
        }
    }
    if (!any) throw Error("speed_cost: distance field has no positive values (empty foreground)");

    cost.x_star = g.coords(arg);
    cost.d_star = dmax;
    for (std::size_t i = 0; i < dfield.data.size(); ++i) {
        double d = dfield.data[i];
        if (d <= 0.0) continue;  // background stays impassable
        double ratio = d / dmax;
        cost.f.data[i] = std::max(0.0, 1.0 - ratio * ratio);
    }
    return cost;
}

ScalarField solve_eikonal(const CostField& cost, std::span<const Vec3> seeds) {
    auto voxels = seeds_to_voxels(cost.f.grid, seeds);
    return fast_march(cost, voxels, /*reciprocal=*/false);
}

namespace detail {

ScalarField solve_eikonal_voxels(const CostField& cost, std::span<const std::size_t> seed_voxels) {
    return fast_march(cost, seed_voxels, /*reciprocal=*/false);
}

ScalarField solve_exploration_voxels(const CostField& cost, std::span<const std::size_t> seed_voxels) {
    return fast_march(cost, seed_voxels, /*reciprocal=*/true);
}

}  // namespace detail

}  // namespace csd
