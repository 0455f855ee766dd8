#include "csd/skeleton_graph.hpp"
#include "csd/synth.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace csd;

namespace {

// Hand-built skeleton from straight segments between named node points.
// Branch polylines get a midpoint so arc lengths are exercised.
CurveSkeleton make_skeleton(const std::vector<Vec3>& nodes,
                            const std::vector<std::pair<int, int>>& branches) {
    CurveSkeleton skel;
    for (const Vec3& p : nodes) skel.nodes.push_back({p, {}});
    for (std::size_t b = 0; b < branches.size(); ++b) {
        auto [s, e] = branches[b];
        Polyline poly;
        poly.push_back(nodes[std::size_t(s)]);
        poly.push_back((nodes[std::size_t(s)] + nodes[std::size_t(e)]) * 0.5);
        poly.push_back(nodes[std::size_t(e)]);
        skel.branches.push_back(std::move(poly));
        skel.branch_nodes.push_back({s, e});
        skel.nodes[std::size_t(s)].incident.push_back(int(b));
        skel.nodes[std::size_t(e)].incident.push_back(int(b));
    }
    return skel;
}

// Mirror of the seven-branch trunk-and-two-crossings layout.
CurveSkeleton weave_like_skeleton() {
    return make_skeleton(
        {
            {0, 0, 0},     // 0: trunk left end
            {40, 0, 0},    // 1: junction j1
            {80, 0, 0},    // 2: junction j2
            {120, 0, 0},   // 3: trunk right end
            {15, -25, 0},  // 4: first crossing, low end
            {65, 25, 0},   // 5: first crossing, high end
            {55, 25, 0},   // 6: second crossing, high end
            {105, -25, 0}, // 7: second crossing, low end
        },
        {{0, 1}, {1, 2}, {2, 3}, {4, 1}, {1, 5}, {6, 2}, {2, 7}});
}

}  // namespace

TEST_SUITE("skelgraph") {

TEST_CASE("single branch gives the K2 graph") {
    CurveSkeleton skel = make_skeleton({{0, 0, 0}, {10, 0, 0}}, {{0, 1}});
    SkeletonGraph g = build_graph(skel);
    CHECK(g.edges.size() == 1);
    CHECK(g.n_vertices == 2);
    CHECK(g.edges[0].length == doctest::Approx(10.0));
}

TEST_CASE("weave-like skeleton: seven edges, eight vertices") {
    SkeletonGraph g = build_graph(weave_like_skeleton());
    CHECK(g.edges.size() == 7);
    CHECK(g.n_vertices == 8);
    CHECK(g.adjacency[1].size() == 4);
    CHECK(g.adjacency[2].size() == 4);
}

TEST_CASE("Y skeleton: three edges around a degree-3 center") {
    CurveSkeleton skel = make_skeleton({{0, 0, 0}, {10, 0, 0}, {20, 8, 0}, {20, -8, 0}},
                                       {{0, 1}, {1, 2}, {1, 3}});
    SkeletonGraph g = build_graph(skel);
    CHECK(g.edges.size() == 3);
    CHECK(g.n_vertices == 4);
    CHECK(g.adjacency[1].size() == 3);
}

TEST_CASE("cyclic incidence is rejected with the offending edge") {
    CurveSkeleton skel = make_skeleton({{0, 0, 0}, {10, 0, 0}, {5, 8, 0}},
                                       {{0, 1}, {1, 2}, {2, 0}});
    CHECK_THROWS_WITH_AS(build_graph(skel), doctest::Contains("cycl"), Error);
}

TEST_CASE("edge angles: collinear, perpendicular, bent") {
    CurveSkeleton skel = make_skeleton(
        {{0, 0, 0}, {10, 0, 0}, {20, 0, 0}, {10, 10, 0}, {20, 10, 0}},
        {{0, 1}, {1, 2}, {1, 3}, {1, 4}});
    SkeletonGraph g = build_graph(skel);
    // edge 0 arrives at vertex 1 from -x; edge 1 continues along +x
    CHECK(edge_angle(g, skel, 0, 1) == doctest::Approx(M_PI));
    CHECK(edge_angle(g, skel, 0, 2) == doctest::Approx(M_PI / 2));
    // edge 3 leaves at 45 degrees: a bent continuation of edge 0
    CHECK(edge_angle(g, skel, 0, 3) == doctest::Approx(3 * M_PI / 4));
    CHECK_THROWS_AS(edge_angle(g, skel, 2, 2), Error);
}

TEST_CASE("partition of the weave-like graph at theta_c 0 gives three paths") {
    CurveSkeleton skel = weave_like_skeleton();
    SkeletonGraph g = build_graph(skel);
    PathPartition p = partition_paths(g, skel, 0.0);
    REQUIRE(p.paths.size() == 3);
    // the trunk chain comes first (it holds the longest edge) and holds
    // the three trunk edges in walk order, either orientation
    bool fwd = p.paths[0].edges == std::vector<int>{0, 1, 2};
    bool bwd = p.paths[0].edges == std::vector<int>{2, 1, 0};
    CHECK((fwd || bwd));
    // the crossing chains pair their two halves
    for (std::size_t i = 1; i < 3; ++i) CHECK(p.paths[i].edges.size() == 2);
}

TEST_CASE("theta_c beyond pi forces singleton paths") {
    CurveSkeleton skel = weave_like_skeleton();
    SkeletonGraph g = build_graph(skel);
    PathPartition p = partition_paths(g, skel, 181.0 * M_PI / 180.0);
    CHECK(p.paths.size() == g.edges.size());
    for (const auto& path : p.paths) CHECK(path.edges.size() == 1);
}

TEST_CASE("three collinear edges chain into one path") {
    CurveSkeleton skel = make_skeleton({{0, 0, 0}, {10, 0, 0}, {20, 0, 0}, {30, 0, 0}},
                                       {{0, 1}, {1, 2}, {2, 3}});
    SkeletonGraph g = build_graph(skel);
    PathPartition p = partition_paths(g, skel, 0.0);
    REQUIRE(p.paths.size() == 1);
    CHECK(p.paths[0].edges.size() == 3);
    CHECK(p.paths[0].vertex_seq.size() == 4);
}

TEST_CASE("partition is a disjoint cover of the edge set") {
    CurveSkeleton skel = weave_like_skeleton();
    SkeletonGraph g = build_graph(skel);
    for (double theta : {0.0, 1.0, 2.0, 3.2}) {
        PathPartition p = partition_paths(g, skel, theta);
        std::vector<int> seen(g.edges.size(), 0);
        for (const auto& path : p.paths)
            for (int e : path.edges) seen[std::size_t(e)] += 1;
        for (int count : seen) CHECK(count == 1);
    }
}

TEST_CASE("path count is nondecreasing in theta_c") {
    CurveSkeleton skel = weave_like_skeleton();
    SkeletonGraph g = build_graph(skel);
    std::size_t prev = 0;
    for (double deg : {0.0, 45.0, 90.0, 135.0, 181.0}) {
        PathPartition p = partition_paths(g, skel, deg * M_PI / 180.0);
        CHECK(p.paths.size() >= prev);
        prev = p.paths.size();
    }
}

TEST_CASE("partition runs are deterministic") {
    CurveSkeleton skel = weave_like_skeleton();
    SkeletonGraph g = build_graph(skel);
    std::string a = partition_to_json(partition_paths(g, skel, 0.5));
    std::string b = partition_to_json(partition_paths(g, skel, 0.5));
    CHECK(a == b);
}

TEST_CASE("every path contains the longest edge unassigned at its creation") {
    CurveSkeleton skel = weave_like_skeleton();
    SkeletonGraph g = build_graph(skel);
    PathPartition p = partition_paths(g, skel, 0.0);
    std::vector<char> assigned(g.edges.size(), 0);
    for (const auto& path : p.paths) {
        int longest = -1;
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            if (assigned[e]) continue;
            if (longest < 0 || g.edges[e].length > g.edges[std::size_t(longest)].length)
                longest = int(e);
        }
        CHECK(std::find(path.edges.begin(), path.edges.end(), longest) != path.edges.end());
        for (int e : path.edges) assigned[std::size_t(e)] = 1;
    }
}

TEST_CASE("single-branch path becomes a unit-parametrized sub-skeleton") {
    CurveSkeleton skel = make_skeleton({{0, 0, 0}, {10, 0, 0}}, {{0, 1}});
    SkeletonGraph g = build_graph(skel);
    PathPartition p = partition_paths(g, skel, 0.0);
    auto subs = paths_to_subskeletons(p, skel, g);
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].total_length() == doctest::Approx(10.0));
    CHECK(distance(subs[0].at(0.0), {0, 0, 0}) < 1e-9);
    CHECK(distance(subs[0].at(1.0), {10, 0, 0}) < 1e-9);
    CHECK(subs[0].junction_ts.empty());
}

TEST_CASE("two-branch path puts the junction at the arc-length split") {
    // lengths 10 and 30 meeting at a degree-3 vertex
    CurveSkeleton skel = make_skeleton(
        {{0, 0, 0}, {10, 0, 0}, {40, 0, 0}, {10, 5, 0}},
        {{0, 1}, {1, 2}, {1, 3}});
    SkeletonGraph g = build_graph(skel);
    PathPartition p = partition_paths(g, skel, 0.0);
    auto subs = paths_to_subskeletons(p, skel, g);
    const SubSkeleton* trunk = nullptr;
    for (const auto& s : subs)
        if (s.points.length() == doctest::Approx(40.0)) trunk = &s;
    REQUIRE(trunk != nullptr);
    REQUIRE(trunk->junction_ts.size() == 1);
    // the junction sits 10/40 or 30/40 along the concatenation
    double tj = trunk->junction_ts[0];
    CHECK((tj == doctest::Approx(0.25).epsilon(1e-6) || tj == doctest::Approx(0.75).epsilon(1e-6)));
}

TEST_CASE("weave-like trunk path carries both junctions as interior parameters") {
    CurveSkeleton skel = weave_like_skeleton();
    SkeletonGraph g = build_graph(skel);
    PathPartition p = partition_paths(g, skel, 0.0);
    auto subs = paths_to_subskeletons(p, skel, g);
    REQUIRE(subs.size() == 3);
    CHECK(subs[0].junction_ts.size() == 2);
    for (double t : subs[0].junction_ts) {
        CHECK(t > 0.0);
        CHECK(t < 1.0);
    }
    // crossing paths see the junction as an interior vertex too
    CHECK(subs[1].junction_ts.size() == 1);
    CHECK(subs[2].junction_ts.size() == 1);
}

TEST_CASE("end-of-path junctions are recorded for the T rule") {
    // path {0-1}; vertex 1 is a junction where two other edges end
    CurveSkeleton skel = make_skeleton(
        {{0, 0, 0}, {20, 0, 0}, {24, 10, 0}, {24, -10, 0}},
        {{0, 1}, {1, 2}, {1, 3}});
    SkeletonGraph g = build_graph(skel);
    PathPartition p = partition_paths(g, skel, 3.0);  // angles below ~172 degrees: no merges
    auto subs = paths_to_subskeletons(p, skel, g);
    int end_junctions = 0;
    for (const auto& s : subs)
        for (double t : s.junction_ts)
            if (t == 0.0 || t == 1.0) ++end_junctions;
    CHECK(end_junctions >= 1);
}

}  // TEST_SUITE
