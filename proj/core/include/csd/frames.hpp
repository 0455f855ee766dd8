#pragma once

#include <vector>

#include "csd/sweep.hpp"

namespace csd {

/// Transport a plane frame to a new origin and tangent by the
/// double-reflection method; minimizes rotation about the tangent and is
/// stable on straight runs, where the Frenet frame degenerates.
PlaneFrame transport_frame(const PlaneFrame& from, const Vec3& new_origin, const Vec3& new_tangent);

/// Frames along a sampled curve, starting from `initial` at points[0].
/// Tangents come from central differences.
std::vector<PlaneFrame> rotation_minimizing_frames(const std::vector<Vec3>& points,
                                                   const PlaneFrame& initial);

}  // namespace csd
