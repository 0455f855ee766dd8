#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "csd/geometry.hpp"

namespace csd {

/// Errors raised by the library carry a human-readable message naming the
/// offending field or stage.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct GridShape {
    Vec3i dims;                          // voxels per axis, each >= 1
    Vec3 spacing{1.0, 1.0, 1.0};         // world units per voxel

    std::size_t voxel_count() const {
        return std::size_t(dims.x) * std::size_t(dims.y) * std::size_t(dims.z);
    }
    std::size_t index(int x, int y, int z) const {
        return std::size_t(x) + std::size_t(dims.x) * (std::size_t(y) + std::size_t(dims.y) * std::size_t(z));
    }
    Vec3i coords(std::size_t i) const {
        int x = int(i % std::size_t(dims.x));
        std::size_t r = i / std::size_t(dims.x);
        return {x, int(r % std::size_t(dims.y)), int(r / std::size_t(dims.y))};
    }
    bool contains(int x, int y, int z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < dims.x && y < dims.y && z < dims.z;
    }
    /// World position of the voxel center.
    Vec3 world(int x, int y, int z) const {
        return {x * spacing.x, y * spacing.y, z * spacing.z};
    }
    Vec3 world(const Vec3i& v) const { return world(v.x, v.y, v.z); }
    /// Continuous grid coordinates (voxel units) of a world point.
    Vec3 to_grid(const Vec3& w) const {
        return {w.x / spacing.x, w.y / spacing.y, w.z / spacing.z};
    }
    double min_spacing() const {
        return std::min(spacing.x, std::min(spacing.y, spacing.z));
    }
    bool same_grid(const GridShape& o) const {
        return dims == o.dims;
    }
};

/// 3D occupancy grid: the discrete object domain.
struct BinaryVolume {
    GridShape grid;
    std::vector<std::uint8_t> data;  // 0 = background, 1 = foreground

    BinaryVolume() = default;
    BinaryVolume(Vec3i dims, Vec3 spacing = {1, 1, 1});

    bool at(int x, int y, int z) const { return data[grid.index(x, y, z)] != 0; }
    void set(int x, int y, int z, bool v) { data[grid.index(x, y, z)] = v ? 1 : 0; }
    std::size_t foreground_count() const;

    /// Trilinear interpolation of occupancy at a world point; outside the
    /// grid counts as background.
    double sample(const Vec3& world_point) const;
};

/// Per-voxel real field over the same grid as a BinaryVolume. Values at
/// voxels outside the object are either 0 (distance fields) or +inf
/// (arrival times); unreachable() tests the latter.
struct ScalarField {
    GridShape grid;
    std::vector<double> data;

    ScalarField() = default;
    ScalarField(Vec3i dims, Vec3 spacing = {1, 1, 1}, double fill = 0.0);

    double at(int x, int y, int z) const { return data[grid.index(x, y, z)]; }
    static constexpr double unreachable_value() { return std::numeric_limits<double>::infinity(); }
    bool unreachable(std::size_t i) const { return !(data[i] < unreachable_value()); }

    /// Trilinear interpolation at a world point. Non-finite corners are
    /// excluded and the stencil renormalized; returns +inf when every
    /// corner is unreachable.
    double sample(const Vec3& world_point) const;
};

/// Per-voxel nonnegative integer labels, 0 = background.
struct LabelVolume {
    GridShape grid;
    std::vector<std::uint32_t> data;

    LabelVolume() = default;
    LabelVolume(Vec3i dims, Vec3 spacing = {1, 1, 1});

    std::uint32_t at(int x, int y, int z) const { return data[grid.index(x, y, z)]; }
    void set(int x, int y, int z, std::uint32_t v) { data[grid.index(x, y, z)] = v; }
    std::uint32_t max_label() const;
    /// Remap labels onto a contiguous {0..K} range preserving first-seen
    /// raster order; returns K.
    std::uint32_t compact_labels();
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
};

enum class VolumeFormat { auto_detect, nrrd, raw_json };

/// Read a BinaryVolume; nonzero voxels become foreground. Formats: NRRD
/// (attached or detached header, raw or gzip encoding) and raw+json
/// (little-endian u8 buffer with a JSON sidecar).
BinaryVolume load_volume(const std::string& path, VolumeFormat format = VolumeFormat::auto_detect);
void save_volume(const BinaryVolume& vol, const std::string& path,
                 VolumeFormat format = VolumeFormat::auto_detect);

LabelVolume load_labels(const std::string& path, VolumeFormat format = VolumeFormat::auto_detect);
void save_labels(const LabelVolume& labels, const std::string& path,
                 VolumeFormat format = VolumeFormat::auto_detect);

/// Exact Euclidean distance (world units, spacing-aware) from each
/// foreground voxel center to the nearest background voxel center;
/// 0 on background. Rejects all-foreground volumes.
ScalarField distance_field(const BinaryVolume& vol);

enum class Connectivity { six = 6, twenty_six = 26 };

/// Deterministic connected-component labeling: labels ordered by the
/// raster index of each component's first voxel.
LabelVolume connected_components(const BinaryVolume& vol, Connectivity conn = Connectivity::six);

/// Marching cubes at the given iso level over the binary occupancy
/// (label selects the component of a LabelVolume). The volume is padded
/// with background so solid inputs produce closed surfaces.
TriangleMesh marching_cubes(const BinaryVolume& vol, double iso = 0.5);
TriangleMesh marching_cubes(const LabelVolume& labels, std::uint32_t label, double iso = 0.5);

void save_mesh_obj(const TriangleMesh& mesh, const std::string& path);
void save_mesh_stl(const TriangleMesh& mesh, const std::string& path);

/// Impulse noise on the object surface: every surface voxel (foreground
/// with a background 6-neighbor) toggles with probability `density`;
/// a toggle removes the voxel itself or adds a uniformly chosen
/// background 6-neighbor, with probability 1/2 each. The largest
/// connected component of the result is kept. Deterministic per seed.
BinaryVolume add_impulse_noise(const BinaryVolume& vol, double density, std::uint64_t seed);

}  // namespace csd
