#include <cmath>

#include "csd/frames.hpp"

namespace csd {

PlaneFrame transport_frame(const PlaneFrame& from, const Vec3& new_origin, const Vec3& new_tangent) {
    Vec3 t1 = normalized(new_tangent);
    if (norm(t1) == 0.0) t1 = from.normal;

    // double reflection (Wang et al.): reflect across the chord midplane,
    // then across the bisector of the reflected and target tangents
    Vec3 v1 = new_origin - from.origin;
    double c1 = dot(v1, v1);
    Vec3 rL = from.u, tL = from.normal;
    if (c1 > 1e-30) {
        rL = from.u - v1 * (2.0 / c1 * dot(v1, from.u));
        tL = from.normal - v1 * (2.0 / c1 * dot(v1, from.normal));
    }
    Vec3 v2 = t1 - tL;
    double c2 = dot(v2, v2);
    Vec3 r1 = rL;
    if (c2 > 1e-30) r1 = rL - v2 * (2.0 / c2 * dot(v2, rL));

    // orthonormalize against accumulated rounding
    r1 = normalized(r1 - t1 * dot(r1, t1));
    PlaneFrame out;
    out.origin = new_origin;
    out.normal = t1;
    out.u = r1;
    out.v = cross(t1, r1);
    return out;
}

std::vector<PlaneFrame> rotation_minimizing_frames(const std::vector<Vec3>& points,
                                                   const PlaneFrame& initial) {
    std::vector<PlaneFrame> frames;
    frames.reserve(points.size());
    if (points.empty()) return frames;
    frames.push_back(initial);
    for (std::size_t i = 1; i < points.size(); ++i) {
        Vec3 tangent;
        if (i + 1 < points.size())
            tangent = points[i + 1] - points[i - 1];
        else
            tangent = points[i] - points[i - 1];
        frames.push_back(transport_frame(frames.back(), points[i], tangent));
    }
    return frames;
}

}  // namespace csd
