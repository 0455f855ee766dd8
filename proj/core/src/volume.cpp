#include "csd/volume.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace csd {

namespace {

void check_dims(const Vec3i& dims, const Vec3& spacing) {
    if (dims.x < 1 || dims.y < 1 || dims.z < 1)
        throw Error("volume dims must be positive, got " + std::to_string(dims.x) + "x" +
                    std::to_string(dims.y) + "x" + std::to_string(dims.z));
    if (!(spacing.x > 0.0) || !(spacing.y > 0.0) || !(spacing.z > 0.0))
        throw Error("voxel spacing must be positive");
}

}  // namespace

BinaryVolume::BinaryVolume(Vec3i dims, Vec3 spacing) {
    check_dims(dims, spacing);
    grid.dims = dims;
    grid.spacing = spacing;
    data.assign(grid.voxel_count(), 0);
}

std::size_t BinaryVolume::foreground_count() const {
    return std::size_t(std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; }));
}

ScalarField::ScalarField(Vec3i dims, Vec3 spacing, double fill) {
    check_dims(dims, spacing);
    grid.dims = dims;
    grid.spacing = spacing;
    data.assign(grid.voxel_count(), fill);
}

LabelVolume::LabelVolume(Vec3i dims, Vec3 spacing) {
    check_dims(dims, spacing);
    grid.dims = dims;
    grid.spacing = spacing;
    data.assign(grid.voxel_count(), 0);
}

std::uint32_t LabelVolume::max_label() const {
    std::uint32_t m = 0;
    for (std::uint32_t v : data) m = std::max(m, v);
    return m;
}

std::uint32_t LabelVolume::compact_labels() {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    std::uint32_t next = 1;
    for (std::uint32_t& v : data) {
        if (v == 0) continue;
        auto [it, inserted] = remap.try_emplace(v, next);
        if (inserted) ++next;
        v = it->second;
    }
    return next - 1;
}

namespace {

// Shared trilinear kernel. `fetch` returns the corner value; non-finite
// corners are dropped and the weights renormalized.
template <typename Fetch>
double trilinear(const GridShape& grid, const Vec3& world_point, Fetch fetch, double outside) {
    Vec3 g = grid.to_grid(world_point);
    int x0 = int(std::floor(g.x)), y0 = int(std::floor(g.y)), z0 = int(std::floor(g.z));
    double fx = g.x - x0, fy = g.y - y0, fz = g.z - z0;

    double acc = 0.0, wsum = 0.0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                int x = x0 + dx, y = y0 + dy, z = z0 + dz;
                double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) * (dz ? fz : 1.0 - fz);
                if (w == 0.0) continue;
                double v = grid.contains(x, y, z) ? fetch(x, y, z) : outside;
                if (!std::isfinite(v)) continue;
                acc += w * v;
                wsum += w;
            }
    if (wsum == 0.0) return std::numeric_limits<double>::infinity();
    return acc / wsum;
}

}  // namespace

double BinaryVolume::sample(const Vec3& world_point) const {
    return trilinear(grid, world_point,
                     [&](int x, int y, int z) { return double(data[grid.index(x, y, z)]); }, 0.0);
}

double ScalarField::sample(const Vec3& world_point) const {
    return trilinear(grid, world_point,
                     [&](int x, int y, int z) { return data[grid.index(x, y, z)]; },
                     std::numeric_limits<double>::infinity());
}

}  // namespace csd
