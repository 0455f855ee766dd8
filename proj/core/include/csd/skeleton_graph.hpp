#pragma once

#include <string>
#include <vector>

#include "csd/skeleton.hpp"

namespace csd {

/// Tree over skeleton nodes: one edge per branch, edge length = branch
/// arc length.
struct SkeletonGraph {
    int n_vertices = 0;
    struct Edge {
        int v0, v1;      // vertex ids (= skeleton node ids)
        int branch;      // branch id (= edge id)
        double length;
    };
    std::vector<Edge> edges;
    std::vector<std::vector<int>> adjacency;  // vertex -> incident edge ids

    int other_vertex(int edge, int v) const {
        const Edge& e = edges[std::size_t(edge)];
        return e.v0 == v ? e.v1 : e.v0;
    }
};

SkeletonGraph build_graph(const CurveSkeleton& skel);

/// Angle between the chords of two branches meeting at their shared
/// vertex, measured between the away-pointing chord vectors: a straight
/// continuation gives pi, doubling back gives 0.
double edge_angle(const SkeletonGraph& g, const CurveSkeleton& skel, int e1, int e2);

struct PathPartition {
    // ordered edge ids per path; vertex_seq has one more entry than edges
    struct Path {
        std::vector<int> edges;
        std::vector<int> vertex_seq;
    };
    std::vector<Path> paths;
};

/// Greedy maximal-path cover: repeatedly seed with the longest unassigned
/// edge and extend from both ends through the unassigned edge of maximal
/// angle, accepting only angles strictly above theta_c (radians).
/// theta_c > pi forces singleton paths. Ties break on the lowest edge id.
PathPartition partition_paths(const SkeletonGraph& g, const CurveSkeleton& skel, double theta_c);

std::string partition_to_json(const PathPartition& p);

/// Arc-length parametrized polyline over one partition path.
struct SubSkeleton {
    Polyline points;              // concatenated branch polylines
    std::vector<double> junction_ts;   // normalized t of every path vertex with degree >= 3
    std::vector<int> junction_nodes;   // matching skeleton node ids
    int path_id = 0;

    double total_length() const { return points.length(); }
    /// Point at normalized arc-length t in [0,1].
    Vec3 at(double t) const;
    /// Unit tangent at t by central differences along the polyline.
    Vec3 tangent(double t) const;
    /// Normalized parameter of the given arc length.
    double t_of_arc(double s) const { return points.length() > 0 ? s / points.length() : 0.0; }
};

std::vector<SubSkeleton> paths_to_subskeletons(const PathPartition& p, const CurveSkeleton& skel,
                                               const SkeletonGraph& g);

}  // namespace csd
