#include <algorithm>
#include <cmath>

#include "csd/skeleton.hpp"

namespace csd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Builder {
    std::vector<Polyline> branches;
    std::vector<std::array<int, 2>> branch_nodes;
    std::vector<SkeletonNode> nodes;
    std::vector<char> branch_alive;
    std::vector<char> node_alive;
    double snap_tol;

    int add_node(const Vec3& p) {
        nodes.push_back({p, {}});
        node_alive.push_back(1);
        return int(nodes.size()) - 1;
    }

    int add_branch(Polyline poly, int n_start, int n_end) {
        int id = int(branches.size());
        branches.push_back(std::move(poly));
        branch_nodes.push_back({n_start, n_end});
        branch_alive.push_back(1);
        nodes[std::size_t(n_start)].incident.push_back(id);
        nodes[std::size_t(n_end)].incident.push_back(id);
        return id;
    }

    void drop_incidence(int node, int branch) {
        auto& inc = nodes[std::size_t(node)].incident;
        inc.erase(std::find(inc.begin(), inc.end(), branch));
    }

    // Nearest alive node within the snap tolerance.
    int nearest_node(const Vec3& p) const {
        int best = -1;
        double best_d = snap_tol;
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            if (!node_alive[n]) continue;
            double d = distance(nodes[n].position, p);
            if (d <= best_d) {
                best_d = d;
                best = int(n);
            }
        }
        return best;
    }

    // Nearest point over all alive branch polylines.
    void nearest_branch_point(const Vec3& p, int& branch, std::size_t& index, double& dist) const {
        branch = -1;
        index = 0;
        dist = kInf;
        for (std::size_t b = 0; b < branches.size(); ++b) {
            if (!branch_alive[b]) continue;
            const auto& pts = branches[b].points;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                double d = distance(pts[i], p);
                if (d < dist) {
                    dist = d;
                    branch = int(b);
                    index = i;
                }
            }
        }
    }

    // Split branch b at interior point index i, returning the junction node.
    int split_branch(int b, std::size_t i) {
        const Polyline& whole = branches[std::size_t(b)];
        Vec3 at = whole.points[i];
        int j = add_node(at);

        Polyline head, tail;
        for (std::size_t k = 0; k <= i; ++k) head.push_back(whole.points[k]);
        for (std::size_t k = i; k < whole.points.size(); ++k) tail.push_back(whole.points[k]);

        int n_start = branch_nodes[std::size_t(b)][0];
        int n_end = branch_nodes[std::size_t(b)][1];

        branches[std::size_t(b)] = std::move(head);
        branch_nodes[std::size_t(b)][1] = j;
        nodes[std::size_t(j)].incident.push_back(b);
        drop_incidence(n_end, b);

        add_branch(std::move(tail), j, n_end);
        (void)n_start;
        return j;
    }

    // A degree-2 node is regular, not a node: fuse its two branches.
    void merge_through(int node) {
        auto& inc = nodes[std::size_t(node)].incident;
        if (inc.size() != 2) return;
        int p = std::min(inc[0], inc[1]);
        int q = std::max(inc[0], inc[1]);
        if (p == q) return;  // self-loop; genus violation, leave to graph checks

        Polyline pp = branches[std::size_t(p)];
        Polyline qq = branches[std::size_t(q)];
        if (branch_nodes[std::size_t(p)][1] != node) pp.reverse();
        if (branch_nodes[std::size_t(q)][0] != node) qq.reverse();
        int start = branch_nodes[std::size_t(p)][1] == node ? branch_nodes[std::size_t(p)][0]
                                                            : branch_nodes[std::size_t(p)][1];
        int end = branch_nodes[std::size_t(q)][0] == node ? branch_nodes[std::size_t(q)][1]
                                                          : branch_nodes[std::size_t(q)][0];

        Polyline merged;
        for (const Vec3& v : pp.points) merged.push_back(v);
        for (const Vec3& v : qq.points) merged.push_back(v);

        branches[std::size_t(p)] = std::move(merged);
        branch_nodes[std::size_t(p)] = {start, end};
        branch_alive[std::size_t(q)] = 0;
        drop_incidence(end, q);
        nodes[std::size_t(end)].incident.push_back(p);
        node_alive[std::size_t(node)] = 0;
        nodes[std::size_t(node)].incident.clear();
        // `start` keeps its incidence on p
    }

    // Extend a branch endpoint along `path` (ordered from the node outward)
    // and move that endpoint's node to the path's end.
    void extend_branch(int b, int node, const std::vector<Vec3>& path) {
        Polyline& poly = branches[std::size_t(b)];
        if (branch_nodes[std::size_t(b)][1] == node) {
            for (const Vec3& p : path) poly.push_back(p);
        } else {
            poly.reverse();
            for (const Vec3& p : path) poly.push_back(p);
            poly.reverse();
        }
    }

    // Two junctions joined by a branch shorter than the inscribed ball at
    // its midpoint are one junction region: collapse the bridge, reattach
    // its neighbors to the midpoint.
    void consolidate_junctions(const ScalarField& dfield) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t b = 0; b < branches.size() && !changed; ++b) {
                if (!branch_alive[b]) continue;
                int n0 = branch_nodes[b][0], n1 = branch_nodes[b][1];
                if (n0 == n1) continue;
                if (nodes[std::size_t(n0)].incident.size() < 3 ||
                    nodes[std::size_t(n1)].incident.size() < 3)
                    continue;
                const Polyline& bridge = branches[b];
                Vec3 mid = bridge.points[bridge.points.size() / 2];
                double depth = dfield.sample(mid);
                if (!(bridge.length() < 2.0 * depth)) continue;

                std::size_t mid_idx = bridge.points.size() / 2;
                std::vector<Vec3> from_n0(bridge.points.begin(),
                                          bridge.points.begin() + std::ptrdiff_t(mid_idx) + 1);
                std::vector<Vec3> from_n1(bridge.points.rbegin(),
                                          bridge.points.rend() - std::ptrdiff_t(mid_idx));

                drop_incidence(n0, int(b));
                drop_incidence(n1, int(b));
                branch_alive[b] = 0;

                for (int e : std::vector<int>(nodes[std::size_t(n0)].incident))
                    extend_branch(e, n0, from_n0);
                for (int e : std::vector<int>(nodes[std::size_t(n1)].incident)) {
                    extend_branch(e, n1, from_n1);
                    if (branch_nodes[std::size_t(e)][0] == n1) branch_nodes[std::size_t(e)][0] = n0;
                    if (branch_nodes[std::size_t(e)][1] == n1) branch_nodes[std::size_t(e)][1] = n0;
                    nodes[std::size_t(n0)].incident.push_back(e);
                }
                nodes[std::size_t(n1)].incident.clear();
                node_alive[std::size_t(n1)] = 0;
                nodes[std::size_t(n0)].position = mid;
                changed = true;
            }
        }
    }

    // Attach a freshly traced branch. Its back() is the terminal near the
    // existing skeleton (or x* on the first branch).
    void attach(Polyline poly) {
        if (branches.empty()) {
            int a = add_node(poly.points.front());
            int b = add_node(poly.points.back());
            add_branch(std::move(poly), a, b);
            return;
        }
        Vec3 q = poly.points.back();
        int node = nearest_node(q);
        if (node < 0) {
            int b;
            std::size_t i;
            double d;
            nearest_branch_point(q, b, i, d);
            if (b < 0 || d > 2.0 * snap_tol)
                throw Error("skeleton attach: branch terminal is not near the existing skeleton");
            // near-end hits snap to the end node instead of splitting
            double arc_from_start = branches[std::size_t(b)].arc[i];
            double arc_to_end = branches[std::size_t(b)].length() - arc_from_start;
            if (arc_from_start <= snap_tol)
                node = branch_nodes[std::size_t(b)][0];
            else if (arc_to_end <= snap_tol)
                node = branch_nodes[std::size_t(b)][1];
            else
                node = split_branch(b, i);
        }
        poly.push_back(nodes[std::size_t(node)].position);
        int a = add_node(poly.points.front());
        add_branch(std::move(poly), a, node);
        merge_through(node);
    }

    CurveSkeleton finish(std::vector<Polyline> traces) {
        CurveSkeleton out;
        std::vector<int> node_map(nodes.size(), -1);
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            if (!node_alive[n]) continue;
            node_map[n] = int(out.nodes.size());
            out.nodes.push_back({nodes[n].position, {}});
        }
        std::vector<int> branch_map(branches.size(), -1);
        for (std::size_t b = 0; b < branches.size(); ++b) {
            if (!branch_alive[b]) continue;
            branch_map[b] = int(out.branches.size());
            out.branches.push_back(std::move(branches[b]));
            out.branch_nodes.push_back({node_map[std::size_t(branch_nodes[b][0])],
                                        node_map[std::size_t(branch_nodes[b][1])]});
        }
        for (std::size_t b = 0; b < out.branches.size(); ++b) {
            out.nodes[std::size_t(out.branch_nodes[b][0])].incident.push_back(int(b));
            out.nodes[std::size_t(out.branch_nodes[b][1])].incident.push_back(int(b));
        }
        out.traces = std::move(traces);
        return out;
    }
};

}  // namespace

std::vector<int> CurveSkeleton::junction_nodes() const {
    std::vector<int> out;
    for (std::size_t n = 0; n < nodes.size(); ++n)
        if (degree(int(n)) >= 3) out.push_back(int(n));
    return out;
}

std::vector<int> CurveSkeleton::end_nodes() const {
    std::vector<int> out;
    for (std::size_t n = 0; n < nodes.size(); ++n)
        if (degree(int(n)) == 1) out.push_back(int(n));
    return out;
}

void classify_points(const CurveSkeleton& skel, std::vector<Vec3>& junctions,
                     std::vector<Vec3>& endpoints) {
    junctions.clear();
    endpoints.clear();
    for (std::size_t n = 0; n < skel.nodes.size(); ++n) {
        int deg = skel.degree(int(n));
        if (deg >= 3)
            junctions.push_back(skel.nodes[n].position);
        else if (deg == 1)
            endpoints.push_back(skel.nodes[n].position);
    }
}

namespace detail {

void rasterize_polyline(const GridShape& grid, const Polyline& poly, std::vector<std::size_t>& out) {
    Vec3i prev{-1, -1, -1};
    bool have_prev = false;
    for (const Vec3& p : poly.points) {
        Vec3 gc = grid.to_grid(p);
        Vec3i v{int(std::lround(gc.x)), int(std::lround(gc.y)), int(std::lround(gc.z))};
        if (!grid.contains(v.x, v.y, v.z)) continue;
        if (have_prev) {
            // bridge diagonal steps one axis at a time
            Vec3i c = prev;
            while (!(c == v)) {
                int dx = v.x - c.x, dy = v.y - c.y, dz = v.z - c.z;
                int adx = std::abs(dx), ady = std::abs(dy), adz = std::abs(dz);
                if (adx >= ady && adx >= adz)
                    c.x += dx > 0 ? 1 : -1;
                else if (ady >= adz)
                    c.y += dy > 0 ? 1 : -1;
                else
                    c.z += dz > 0 ? 1 : -1;
                out.push_back(grid.index(c.x, c.y, c.z));
            }
        } else {
            out.push_back(grid.index(v.x, v.y, v.z));
        }
        prev = v;
        have_prev = true;
    }
}

}  // namespace detail

CurveSkeleton extract_skeleton(const BinaryVolume& vol, const SkeletonParams& params) {
    ScalarField dfield = distance_field(vol);
    CostField cost = speed_cost(dfield);
    return extract_skeleton(vol, dfield, cost, params);
}

CurveSkeleton extract_skeleton(const BinaryVolume& vol, const ScalarField& dfield,
                               const CostField& cost, const SkeletonParams& params) {
    const GridShape& g = vol.grid;
    if (vol.foreground_count() == 0) throw Error("extract_skeleton: empty foreground");
    {
        LabelVolume comps = connected_components(vol, Connectivity::six);
        if (comps.max_label() != 1) throw Error("extract_skeleton: disconnected foreground");
    }

    double min_len = params.min_branch_length > 0.0 ? params.min_branch_length : 2.0 * cost.d_star;

    Builder builder;
    builder.snap_tol = g.min_spacing();

    std::vector<std::size_t> seeds{g.index(cost.x_star.x, cost.x_star.y, cost.x_star.z)};
    std::vector<char> seeded(g.voxel_count(), 0);
    seeded[seeds[0]] = 1;

    std::vector<Polyline> traces;

    for (int k = 0; k < params.max_branches; ++k) {
        ScalarField arrival = detail::solve_eikonal_voxels(cost, seeds);
        ScalarField reach = detail::solve_exploration_voxels(cost, seeds);

        std::size_t best = 0;
        double best_t = -1.0;
        for (std::size_t i = 0; i < reach.data.size(); ++i) {
            double t = reach.data[i];
            if (t < kInf && t > best_t) {
                best_t = t;
                best = i;
            }
        }
        if (best_t <= 0.0) break;  // the skeleton already covers every deep voxel

        Vec3i xs = g.coords(best);
        Polyline poly = backtrack(arrival, g.world(xs.x, xs.y, xs.z), params.step_voxels);
        if (k > 0 && poly.length() < min_len) break;
        if (poly.points.size() < 2) {
            if (k == 0) throw Error("extract_skeleton: object too compact to trace a branch");
            break;
        }

        traces.push_back(poly);
        builder.attach(poly);

        std::vector<std::size_t> voxels;
        detail::rasterize_polyline(g, poly, voxels);
        for (std::size_t v : voxels) {
            if (seeded[v] || !(cost.f.data[v] < kInf)) continue;
            seeded[v] = 1;
            seeds.push_back(v);
        }
    }

    builder.consolidate_junctions(dfield);
    return builder.finish(std::move(traces));
}

}  // namespace csd
