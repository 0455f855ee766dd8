#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csd/volume.hpp"

namespace csd {

/// Slowness field for centered path tracing: F = 1 - (D(x)/D(x*))^2 with
/// x* the deepest foreground voxel. F vanishes at x*, approaches 1 at the
/// surface, and is impassable (+inf) on background.
struct CostField {
    ScalarField f;
    Vec3i x_star;
    double d_star = 0.0;
};

CostField speed_cost(const ScalarField& dfield);

/// Ordered sub-voxel points with cumulative arc length.
struct Polyline {
    std::vector<Vec3> points;
    std::vector<double> arc;  // arc[i] = length of points[0..i]

    double length() const { return arc.empty() ? 0.0 : arc.back(); }
    void push_back(const Vec3& p);
    void reverse();
};

struct SkeletonNode {
    Vec3 position;
    std::vector<int> incident;  // branch ids, one entry per incident branch END
};

enum class NodeType { endpoint, junction };

/// Curve skeleton: sub-voxel branch polylines plus the node incidence
/// structure. Built iteratively, each new branch attaches to the existing
/// skeleton at exactly one node, so the incidence is always a tree.
struct CurveSkeleton {
    std::vector<Polyline> branches;
    std::vector<SkeletonNode> nodes;
    // per branch: node ids at points.front() / points.back()
    std::vector<std::array<int, 2>> branch_nodes;
    // raw back-tracked polylines in extraction order, before splitting
    std::vector<Polyline> traces;

    int degree(int node) const { return int(nodes[std::size_t(node)].incident.size()); }
    NodeType node_type(int node) const {
        return degree(node) >= 3 ? NodeType::junction : NodeType::endpoint;
    }
    std::vector<int> junction_nodes() const;
    std::vector<int> end_nodes() const;
};

/// Junction and endpoint positions by incidence degree.
void classify_points(const CurveSkeleton& skel, std::vector<Vec3>& junctions,
                     std::vector<Vec3>& endpoints);

/// First-order fast-marching arrival times U with |grad U| = max(F, 1e-6),
/// U = 0 at the seeds. Seeds must lie on the foreground.
ScalarField solve_eikonal(const CostField& cost, std::span<const Vec3> seeds);

/// Gradient descent on an arrival field with trilinearly interpolated
/// gradients; emits a monotone-arrival polyline and stops within half a
/// voxel of a zero-arrival voxel, appending that point. Start must have a
/// finite arrival. Reports stagnation (no arrival decrease for more than
/// 20 consecutive steps).
Polyline backtrack(const ScalarField& arrival, const Vec3& start, double step_voxels = 0.25);

struct SkeletonParams {
    // Branches shorter than this stop the extraction; non-positive means
    // the 2*D(x*) default.
    double min_branch_length = 0.0;
    int max_branches = 64;
    double step_voxels = 0.25;
};

/// Iterative branch extraction: solve from the current skeleton, pick the
/// farthest deep voxel, back-track, attach. Junctions appear where a new
/// branch lands on an existing one (1-voxel snap tolerance).
CurveSkeleton extract_skeleton(const BinaryVolume& vol, const SkeletonParams& params = {});
CurveSkeleton extract_skeleton(const BinaryVolume& vol, const ScalarField& dfield,
                               const CostField& cost, const SkeletonParams& params = {});

std::string skeleton_to_json(const CurveSkeleton& skel);
CurveSkeleton skeleton_from_json(const std::string& text);
void save_skeleton(const CurveSkeleton& skel, const std::string& path);
CurveSkeleton load_skeleton(const std::string& path);

namespace detail {
/// Arrival time of a wave whose speed is max(F, floor): deep far voxels
/// are reached last. Used to pick the next branch start.
ScalarField solve_eikonal_voxels(const CostField& cost, std::span<const std::size_t> seed_voxels);
ScalarField solve_exploration_voxels(const CostField& cost, std::span<const std::size_t> seed_voxels);
/// Rounds polyline points to voxels, bridging diagonal steps, and appends
/// the indices to `out`.
void rasterize_polyline(const GridShape& grid, const Polyline& poly, std::vector<std::size_t>& out);
}  // namespace detail

}  // namespace csd
