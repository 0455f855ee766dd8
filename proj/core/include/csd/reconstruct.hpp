#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csd/sweep.hpp"

namespace csd {

/// Rasterized cutting disc for one critical point: the foreground voxels
/// within half a voxel of the cutting plane whose in-plane projection
/// falls inside (or within a small rim of) the critical contour.
struct Cut {
    CriticalPoint critical;
    std::vector<std::size_t> disc_voxels;
    bool separates = true;  // updated by cut_object
};

using CutSet = std::vector<Cut>;

Cut make_cut(const BinaryVolume& vol, const CriticalPoint& cp);

struct CutResult {
    LabelVolume pieces;                  // parts and intersections, contiguous labels
    std::vector<std::uint32_t> intersection_labels;  // pieces containing a junction
    int n_parts = 0;
    int n_intersections = 0;
    std::vector<int> failed_cuts;        // indices of cuts that separate nothing
};

/// Remove every cut disc and label the remaining foreground; a piece is an
/// intersection exactly when it contains a junction point.
CutResult cut_object(const BinaryVolume& vol, CutSet& cuts, const std::vector<Vec3>& junctions);

struct SemanticAssignment {
    LabelVolume labels;                       // semantic labels; intersection volume stays 0
    std::vector<int> part_subskel;            // per piece label (1-based): sub-skeleton id or -1
    std::vector<int> fused_pieces;            // pieces bridging two parts (overlap lenses)
    std::vector<int> debris_pieces;           // pieces living between a junction's cuts
    int n_parts_effective = 0;                // parts, with fused pieces counted per arm
};

/// Assign every part to the sub-skeleton holding the longest arc inside
/// it; all parts of one sub-skeleton share one semantic label
/// (sub-skeleton id + 1). Intersections keep label 0.
///
/// A part is a piece holding sub-skeleton arc OUTSIDE every bracket
/// spanned by the critical points around a junction; pieces whose arc
/// lies entirely between a junction's cuts are intersection volume (to be
/// rebuilt), and pieces with outside arc of several sub-skeletons are
/// fusions the cuts could not sever (crossing tubes share an overlap
/// lens), split voxel-wise by nearest sub-skeleton.
SemanticAssignment label_semantic(const CutResult& cut, const std::vector<SubSkeleton>& subskels,
                                  const std::vector<CriticalPoint>& criticals);

/// Cyclic shift plus optional orientation flip of c2 minimizing the sum of
/// squared distances to c1.
std::pair<Contour, Contour> align_contours(const Contour& c1, const Contour& c2);

/// Pointwise convex combination of aligned contours; u = 0 and u = 1
/// return the inputs exactly.
Contour linear_homotopy(const Contour& c1, const Contour& c2, double u);

enum class AxisKind { linear, spline, sine };

/// Axis curve between two critical points: straight segment, cubic
/// Hermite matching the end tangents, or a sine offset with endpoint
/// tangency along the chord.
std::vector<Vec3> axis_curve(const Vec3& p1, const Vec3& tan1, const Vec3& p2, const Vec3& tan2,
                             AxisKind kind, int n_samples);

struct GeneralizedCylinder {
    std::vector<PlaneFrame> frames;     // transported along the axis
    std::vector<std::size_t> voxels;    // rasterized solid
};

/// Translational sweep of the homotopy between two aligned end contours
/// along the axis, rasterized to voxels. du is the arc spacing of the
/// sweep in world units (at most half a voxel). A positive r_cap limits
/// the filled sections to that in-plane radius, which keeps the long
/// strip arms of a merged crossing section out of the solid.
GeneralizedCylinder generalized_cylinder(const Contour& c1, const Contour& c2,
                                         const std::vector<Vec3>& axis, const GridShape& grid,
                                         double du, double r_cap = 0.0);

}  // namespace csd
