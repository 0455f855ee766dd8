#pragma once

#include <string>
#include <vector>

#include "csd/volume.hpp"

namespace csd {

/// A tube around a polyline axis with a constant or linearly tapering
/// radius profile. Radii below 1.5 voxels disconnect when rasterized and
/// are rejected.
struct TubeSpec {
    std::vector<Vec3> axis;         // world-coordinate control points
    double radius_start = 4.0;      // world units
    double radius_end = -1.0;       // < 0 means constant profile
    std::uint32_t label = 1;
};

struct SynthScene {
    BinaryVolume volume;
    LabelVolume ground_truth;                 // per voxel: nearest tube axis
    std::vector<std::vector<Vec3>> axes;      // one polyline per tube, in spec order
};

/// Union of tubes rasterized over the grid; voxel centers within the local
/// radius of a tube axis become foreground. Ground truth assigns each
/// foreground voxel to the nearest axis, lower label id on ties.
SynthScene rasterize_scene(const std::vector<TubeSpec>& specs, Vec3i dims, Vec3 spacing = {1, 1, 1});

std::vector<TubeSpec> load_scene_spec(const std::string& path);
void save_scene_spec(const std::vector<TubeSpec>& specs, Vec3i dims, Vec3 spacing, const std::string& path);
/// Parse dims/spacing from a scene spec file.
void load_scene_header(const std::string& path, Vec3i& dims, Vec3& spacing);

/// Canned scenes used by tests and the command line.
namespace presets {
std::vector<TubeSpec> straight_tube(Vec3i dims, double radius);
std::vector<TubeSpec> x_crossing(Vec3i dims, double radius);
std::vector<TubeSpec> t_junction(Vec3i dims, double radius);
std::vector<TubeSpec> weave(Vec3i dims, double radius);       // three tubes, two crossings
std::vector<TubeSpec> five_branch(Vec3i dims, double radius); // trunk plus bent arms
std::vector<TubeSpec> four_leg(Vec3i dims, double body_radius, double leg_radius);
std::vector<TubeSpec> tapered_tube(Vec3i dims, double r0, double r1);
}  // namespace presets

}  // namespace csd
