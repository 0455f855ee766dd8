#include <algorithm>
#include <cmath>
#include <sstream>

#include "csd/skeleton_graph.hpp"
#include "json.hpp"

namespace csd {

SkeletonGraph build_graph(const CurveSkeleton& skel) {
    SkeletonGraph g;
    g.n_vertices = int(skel.nodes.size());
    g.adjacency.resize(skel.nodes.size());
    for (std::size_t b = 0; b < skel.branches.size(); ++b) {
        double len = skel.branches[b].length();
        if (!(len > 0.0))
            throw Error("build_graph: branch " + std::to_string(b) + " has zero length");
        SkeletonGraph::Edge e{skel.branch_nodes[b][0], skel.branch_nodes[b][1], int(b), len};
        g.adjacency[std::size_t(e.v0)].push_back(int(b));
        g.adjacency[std::size_t(e.v1)].push_back(int(b));
        g.edges.push_back(e);
    }

    // A valid skeleton is a tree; report any cycle with its edge set.
    if (!g.edges.empty()) {
        std::vector<int> parent(std::size_t(g.n_vertices), -2);
        std::vector<int> stack{g.edges[0].v0};
        parent[std::size_t(g.edges[0].v0)] = -1;
        std::size_t visited_edges = 0;
        std::vector<char> edge_seen(g.edges.size(), 0);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int e : g.adjacency[std::size_t(v)]) {
                if (edge_seen[std::size_t(e)]) continue;
                edge_seen[std::size_t(e)] = 1;
                ++visited_edges;
                int w = g.other_vertex(e, v);
                if (parent[std::size_t(w)] != -2) {
                    std::ostringstream msg;
                    msg << "build_graph: cyclic incidence through edge " << e << " between vertices "
                        << v << " and " << w;
                    throw Error(msg.str());
                }
                parent[std::size_t(w)] = v;
                stack.push_back(w);
            }
        }
        (void)visited_edges;
    }
    return g;
}

double edge_angle(const SkeletonGraph& g, const CurveSkeleton& skel, int e1, int e2) {
    const auto& a = g.edges[std::size_t(e1)];
    const auto& b = g.edges[std::size_t(e2)];
    int shared = -1;
    for (int va : {a.v0, a.v1})
        for (int vb : {b.v0, b.v1})
            if (va == vb) shared = va;
    if (shared < 0 || e1 == e2) throw Error("edge_angle: edges do not share exactly one vertex");

    auto away_chord = [&](const SkeletonGraph::Edge& e) {
        const Vec3& at = skel.nodes[std::size_t(shared)].position;
        int far_node = e.v0 == shared ? e.v1 : e.v0;
        return normalized(skel.nodes[std::size_t(far_node)].position - at);
    };
    double c = dot(away_chord(a), away_chord(b));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

PathPartition partition_paths(const SkeletonGraph& g, const CurveSkeleton& skel, double theta_c) {
    PathPartition partition;
    std::vector<char> assigned(g.edges.size(), 0);
    std::size_t remaining = g.edges.size();

    while (remaining > 0) {
        // longest unassigned edge; lowest id on ties
        int e_star = -1;
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            if (assigned[e]) continue;
            if (e_star < 0 || g.edges[e].length > g.edges[std::size_t(e_star)].length) e_star = int(e);
        }

        std::vector<int> fwd, bwd;  // edges appended beyond each endpoint
        assigned[std::size_t(e_star)] = 1;
        --remaining;

        const int endpoints[2] = {g.edges[std::size_t(e_star)].v0, g.edges[std::size_t(e_star)].v1};
        for (int side = 0; side < 2; ++side) {
            std::vector<int>& chain = side == 0 ? fwd : bwd;
            int e_ref = e_star;
            int v_next = endpoints[side];
            while (true) {
                int e_next = -1;
                double theta_max = theta_c;
                for (int e_ngb : g.adjacency[std::size_t(v_next)]) {
                    if (e_ngb == e_ref || assigned[std::size_t(e_ngb)]) continue;
                    double theta = edge_angle(g, skel, e_ref, e_ngb);
                    if (theta > theta_max) {  // strict: ties keep the lower id seen first
                        theta_max = theta;
                        e_next = e_ngb;
                    }
                }
                if (e_next < 0) break;
                chain.push_back(e_next);
                assigned[std::size_t(e_next)] = 1;
                --remaining;
                v_next = g.other_vertex(e_next, v_next);
                e_ref = e_next;
            }
        }

        PathPartition::Path path;
        path.edges.reserve(bwd.size() + 1 + fwd.size());
        for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) path.edges.push_back(*it);
        path.edges.push_back(e_star);
        for (int e : fwd) path.edges.push_back(e);

        // vertex sequence: walk the edge list, starting from the far end
        // of the first edge
        int v = path.edges.size() == 1
                    ? g.edges[std::size_t(path.edges[0])].v0
                    : g.other_vertex(path.edges[0],
                                     [&] {
                                         const auto& ea = g.edges[std::size_t(path.edges[0])];
                                         const auto& eb = g.edges[std::size_t(path.edges[1])];
                                         return (ea.v0 == eb.v0 || ea.v0 == eb.v1) ? ea.v0 : ea.v1;
                                     }());
        path.vertex_seq.push_back(v);
        for (int e : path.edges) {
            v = g.other_vertex(e, v);
            path.vertex_seq.push_back(v);
        }
        partition.paths.push_back(std::move(path));
    }
    return partition;
}

std::string partition_to_json(const PathPartition& p) {
    nlohmann::json j;
    j["paths"] = nlohmann::json::array();
    for (std::size_t i = 0; i < p.paths.size(); ++i) {
        nlohmann::json jp;
        jp["id"] = i;
        jp["edges"] = p.paths[i].edges;
        jp["vertices"] = p.paths[i].vertex_seq;
        j["paths"].push_back(std::move(jp));
    }
    return j.dump(2);
}

Vec3 SubSkeleton::at(double t) const {
    const auto& pts = points.points;
    const auto& arc = points.arc;
    if (pts.empty()) throw Error("sub-skeleton has no points");
    double s = std::clamp(t, 0.0, 1.0) * points.length();
    auto it = std::lower_bound(arc.begin(), arc.end(), s);
    if (it == arc.begin()) return pts.front();
    if (it == arc.end()) return pts.back();
    std::size_t i = std::size_t(it - arc.begin());
    double seg = arc[i] - arc[i - 1];
    double f = seg > 0.0 ? (s - arc[i - 1]) / seg : 0.0;
    return pts[i - 1] + (pts[i] - pts[i - 1]) * f;
}

Vec3 SubSkeleton::tangent(double t) const {
    double len = points.length();
    if (len <= 0.0) return {1, 0, 0};
    // central difference over about one voxel of arc
    double h = std::min(1.0 / std::max(1.0, len), 0.5) * 1.0;
    double t0 = std::clamp(t - h, 0.0, 1.0);
    double t1 = std::clamp(t + h, 0.0, 1.0);
    Vec3 d = at(t1) - at(t0);
    double n = norm(d);
    if (n < 1e-12) {
        // degenerate window; widen
        d = at(std::clamp(t + 4 * h, 0.0, 1.0)) - at(std::clamp(t - 4 * h, 0.0, 1.0));
        n = norm(d);
    }
    return n > 0 ? d / n : Vec3{1, 0, 0};
}

std::vector<SubSkeleton> paths_to_subskeletons(const PathPartition& p, const CurveSkeleton& skel,
                                               const SkeletonGraph& g) {
    std::vector<SubSkeleton> out;

    // Branches start and end exactly on their node positions, so joins are
    // exact; the tolerance only guards hand-built or imported skeletons.
    double max_step = 0.0;
    for (const Polyline& b : skel.branches)
        for (std::size_t i = 1; i < b.points.size(); ++i)
            max_step = std::max(max_step, distance(b.points[i - 1], b.points[i]));
    double tol = std::max(8.0 * max_step, 1e-9);

    for (std::size_t pi = 0; pi < p.paths.size(); ++pi) {
        const auto& path = p.paths[pi];
        SubSkeleton ss;
        ss.path_id = int(pi);

        std::vector<double> vertex_arc;  // arc position of each path vertex
        vertex_arc.push_back(0.0);
        for (std::size_t k = 0; k < path.edges.size(); ++k) {
            int e = path.edges[k];
            int v_from = path.vertex_seq[k];
            const auto& edge = g.edges[std::size_t(e)];
            Polyline branch = skel.branches[std::size_t(edge.branch)];
            if (skel.branch_nodes[std::size_t(edge.branch)][0] != v_from) branch.reverse();

            if (!ss.points.points.empty()) {
                double gap = distance(ss.points.points.back(), branch.points.front());
                if (gap > tol)
                    throw Error("paths_to_subskeletons: discontinuous concatenation (gap " +
                                std::to_string(gap) + ")");
            }
            for (const Vec3& q : branch.points) ss.points.push_back(q);
            vertex_arc.push_back(ss.points.length());
        }

        double total = ss.points.length();
        for (std::size_t k = 0; k < path.vertex_seq.size(); ++k) {
            int v = path.vertex_seq[k];
            if (int(g.adjacency[std::size_t(v)].size()) >= 3) {
                ss.junction_ts.push_back(total > 0 ? vertex_arc[k] / total : 0.0);
                ss.junction_nodes.push_back(v);
            }
        }
        out.push_back(std::move(ss));
    }
    return out;
}

}  // namespace csd
