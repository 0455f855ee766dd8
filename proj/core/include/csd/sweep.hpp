#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csd/skeleton_graph.hpp"
#include "csd/volume.hpp"

namespace csd {

/// Right-handed plane frame: u x v = normal.
struct PlaneFrame {
    Vec3 origin;
    Vec3 u, v, normal;

    Vec3 to_world(const Vec2& p) const { return origin + u * p.x + v * p.y; }
    Vec2 to_plane(const Vec3& w) const {
        Vec3 d = w - origin;
        return {dot(d, u), dot(d, v)};
    }
};

/// Closed cross-sectional contour: counterclockwise points in the plane
/// frame, uniform in arc length, point 0 at the maximal local-x position.
/// The anchor (plane-skeleton intersection) is the local origin.
struct Contour {
    std::vector<Vec2> points;
    PlaneFrame frame;

    double perimeter() const;
    double area() const;  // shoelace, positive for counterclockwise
    /// Farthest sample distance from an interior anchor.
    double max_radius(const Vec2& anchor = {0, 0}) const;
    /// Nearest sample distance from an interior anchor.
    double min_radius(const Vec2& anchor = {0, 0}) const;
};

/// Deterministic in-plane basis for a normal direction.
PlaneFrame frame_for_normal(const Vec3& origin, const Vec3& normal);

/// Cross-sectional contour of the object at parameter t: the iso-0.5
/// curve of the trilinearly sampled occupancy in the plane orthogonal to
/// the sub-skeleton, resampled to n_samples points. Fails when psi(t) is
/// outside the foreground or no contour encloses it. The sampling window
/// grows adaptively up to max_window (0 = the volume diagonal); sections
/// that keep growing past it are clipped to the window, which bounds the
/// unbounded strip a plane parallel to a crossing tube would produce.
Contour cross_section(const BinaryVolume& vol, const SubSkeleton& psi, double t, int n_samples,
                      double max_window = 0.0);
/// Same, but with a caller-supplied frame (used by sweeps that transport
/// frames along the sub-skeleton).
Contour cross_section_in_frame(const BinaryVolume& vol, const PlaneFrame& frame, int n_samples,
                               double max_window = 0.0);

/// Point-set Hausdorff distance between contour samples.
double hausdorff(const Contour& c1, const Contour& c2);
/// Dubuisson-Jain modified Hausdorff: max of directed mean minima.
double modified_hausdorff(const Contour& c1, const Contour& c2);

enum class ContourMetric { hausdorff, modified };

double contour_distance(const Contour& c1, const Contour& c2, ContourMetric metric);

/// Normalized Hausdorff H / (H + d(kappa, C_t)) in [0, 1), where
/// d(kappa, C_t) is the distance from the interior anchor to the contour
/// (its nearest point). Reaches the high range exactly when the section
/// grows anisotropically, e.g. a crossing tube entering the plane.
double normalized_hausdorff(const Contour& c_t, const Contour& mu, const Vec2& kappa,
                            ContourMetric metric = ContourMetric::hausdorff);

/// Running mean of visited contours by orthogonal mapping: each mean point
/// moves along its outward normal to the nearest intersection with the new
/// contour, weighted 1/(k+1). Rays that miss fall back to the nearest
/// point and are counted in `misses`.
Contour mean_update(const Contour& mu, const Contour& c_new, int k, int* misses = nullptr);

struct DecompositionInterval {
    int subskel = 0;
    int junction_node = 0;
    double t_j = 0.0;
    int side = +1;       // +1 approaches from below (t < t_j), -1 from above
    double t_s = 0.0;    // sweep start (outer bound)
    double t_e = 0.0;    // sweep end (inner bound, nearer the junction)
    double r = 0.0;      // inscribed-ball radius at the junction
};

/// Two intervals per interior junction at arc distances alpha_s*r and
/// alpha_e*r, clamped to [0,1]; one interval when the junction sits at a
/// sub-skeleton end.
std::vector<DecompositionInterval> decomposition_intervals(const SubSkeleton& psi,
                                                           const ScalarField& dfield,
                                                           double alpha_s, double alpha_e);

struct CriticalPoint {
    int subskel = 0;
    int junction_node = 0;
    int side = +1;
    double t_c = 0.0;
    Contour contour;
    double h_rho = 0.0;
    bool fallback = false;
};

/// One row per inquiry point, for the --trace diagnostics.
struct SweepSample {
    double t;
    double h_rho;
    bool triggered;
};

struct SweepTrace {
    DecompositionInterval interval;
    std::vector<SweepSample> samples;
};

struct SweepParams {
    double theta_h = 0.8;
    int sf = 1;                 // inquiry-point thinning factor
    ContourMetric metric = ContourMetric::modified;
    int n_samples = 128;
};

/// Sweep each interval toward its junction comparing every cross-section
/// against the running mean; the first H_rho >= theta_h stops the sweep at
/// a critical point. Exhausted intervals take the admissible point of
/// maximal H_rho (fallback).
std::vector<CriticalPoint> find_critical_points(const BinaryVolume& vol, const SubSkeleton& psi,
                                                const std::vector<DecompositionInterval>& intervals,
                                                const SweepParams& params,
                                                std::vector<SweepTrace>* traces = nullptr);

std::string sweep_trace_csv(const SweepTrace& trace);

}  // namespace csd
