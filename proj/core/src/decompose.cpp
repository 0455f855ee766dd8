#include <algorithm>
#include <chrono>
#include <map>

#include "csd/decompose.hpp"
#include "json.hpp"

namespace csd {

using nlohmann::json;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

const int kSix[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

// Level-synchronous flood of the remaining label-0 foreground (cut discs
// and intersection remains). Each wave assigns the label of a neighboring
// labeled voxel; when several labels compete, the nearest sub-skeleton
// decides, so the outcome does not depend on label numbering.
void fill_unlabeled(const BinaryVolume& vol, LabelVolume& labels,
                    const std::vector<SubSkeleton>& subskels) {
    const GridShape& g = vol.grid;
    std::vector<std::size_t> frontier;
    for (std::size_t i = 0; i < vol.data.size(); ++i)
        if (vol.data[i] && labels.data[i] == 0) frontier.push_back(i);

    auto nearest_of = [&](std::size_t i, std::uint32_t a, std::uint32_t b) {
        Vec3i c = g.coords(i);
        Vec3 w = g.world(c.x, c.y, c.z);
        auto dist2_to = [&](std::uint32_t label) {
            const auto& pts = subskels[label - 1].points.points;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < pts.size(); k += 4) best = std::min(best, norm2(pts[k] - w));
            return best;
        };
        return dist2_to(a) <= dist2_to(b) ? a : b;
    };

    while (!frontier.empty()) {
        std::vector<std::pair<std::size_t, std::uint32_t>> assign;
        std::vector<std::size_t> rest;
        for (std::size_t i : frontier) {
            Vec3i c = g.coords(i);
            std::uint32_t best = 0;
            for (const auto& o : kSix) {
                int x = c.x + o[0], y = c.y + o[1], z = c.z + o[2];
                if (!g.contains(x, y, z)) continue;
                std::uint32_t l = labels.at(x, y, z);
                if (!l || l == best) continue;
                if (best == 0)
                    best = l;
                else if (l <= std::uint32_t(subskels.size()) && best <= std::uint32_t(subskels.size()))
                    best = nearest_of(i, best, l);
                else
                    best = std::min(best, l);
            }
            if (best)
                assign.emplace_back(i, best);
            else
                rest.push_back(i);
        }
        if (assign.empty()) break;  // isolated shards; nothing reaches them
        for (auto& [i, l] : assign) labels.data[i] = l;
        frontier = std::move(rest);
    }
}

}  // namespace

DecompositionResult decompose(const BinaryVolume& vol, const RunConfig& cfg, bool keep_traces) {
    cfg.validate();
    auto t_start = std::chrono::steady_clock::now();
    DecompositionResult result;

    // stage: skeleton
    auto t0 = std::chrono::steady_clock::now();
    ScalarField dfield;
    CostField cost;
    try {
        dfield = distance_field(vol);
        cost = speed_cost(dfield);
        SkeletonParams sp;
        sp.min_branch_length = cfg.min_branch_length;
        sp.max_branches = cfg.max_branches;
        result.skeleton = extract_skeleton(vol, dfield, cost, sp);
    } catch (const Error& e) {
        throw Error(std::string("skeleton stage: ") + e.what());
    }
    result.times.skeleton_ms = ms_since(t0);

    // stage: graph partition
    t0 = std::chrono::steady_clock::now();
    SkeletonGraph graph;
    try {
        graph = build_graph(result.skeleton);
        result.partition = partition_paths(graph, result.skeleton, cfg.theta_c_rad());
        result.subskeletons = paths_to_subskeletons(result.partition, result.skeleton, graph);
    } catch (const Error& e) {
        throw Error(std::string("partition stage: ") + e.what());
    }
    result.m = int(result.subskeletons.size());
    result.times.partition_ms = ms_since(t0);

    // stage: decomposition intervals and critical points
    t0 = std::chrono::steady_clock::now();
    SweepParams sweep_params;
    sweep_params.theta_h = cfg.theta_h;
    sweep_params.sf = cfg.sf;
    sweep_params.metric = cfg.metric;
    sweep_params.n_samples = cfg.n_samples;
    try {
        for (const SubSkeleton& psi : result.subskeletons) {
            auto intervals = decomposition_intervals(psi, dfield, cfg.alpha_s, cfg.alpha_e);
            if (intervals.empty()) continue;
            auto cps = find_critical_points(vol, psi, intervals, sweep_params,
                                            keep_traces ? &result.traces : nullptr);
            result.criticals.insert(result.criticals.end(), cps.begin(), cps.end());
        }
    } catch (const Error& e) {
        throw Error(std::string("critical-point stage: ") + e.what());
    }
    result.times.critical_ms = ms_since(t0);

    // no junction anywhere: the object is one semantic component
    if (result.criticals.empty()) {
        result.labels = LabelVolume(vol.grid.dims, vol.grid.spacing);
        for (std::size_t i = 0; i < vol.data.size(); ++i)
            if (vol.data[i]) result.labels.data[i] = 1;
        result.n_parts = 1;
        result.times.total_ms = ms_since(t_start);
        result.provenance = [&] {
            json j;
            j["config"] = json::parse(config_to_json(cfg));
            j["m"] = result.m;
            j["n_parts"] = 1;
            j["n_intersections"] = 0;
            j["pass_through"] = true;
            return j.dump(2);
        }();
        return result;
    }

    // stage: cut
    t0 = std::chrono::steady_clock::now();
    CutSet cuts;
    CutResult cut_result;
    SemanticAssignment semantic;
    std::vector<Vec3> junction_positions;
    for (int n : result.skeleton.junction_nodes())
        junction_positions.push_back(result.skeleton.nodes[std::size_t(n)].position);
    try {
        for (const CriticalPoint& cp : result.criticals) cuts.push_back(make_cut(vol, cp));
        cut_result = cut_object(vol, cuts, junction_positions);
        result.failed_cuts = cut_result.failed_cuts;
        result.n_intersections = cut_result.n_intersections;
        semantic = label_semantic(cut_result, result.subskeletons, result.criticals);
        result.n_parts = semantic.n_parts_effective;
    } catch (const Error& e) {
        throw Error(std::string("cut stage: ") + e.what());
    }
    result.times.cut_ms = ms_since(t0);

    // stage: reconstruct through intersections
    t0 = std::chrono::steady_clock::now();
    result.labels = semantic.labels;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> overlaps;
    json j_cylinders = json::array();
    try {
        // all cylinders first; covered voxels are assigned afterwards so
        // the outcome cannot depend on construction order
        std::vector<std::pair<std::uint32_t, std::vector<std::size_t>>> covers;
        for (std::size_t s = 0; s < result.subskeletons.size(); ++s) {
            const SubSkeleton& psi = result.subskeletons[s];
            // bracketing critical points per junction of this sub-skeleton
            for (int jn : psi.junction_nodes) {
                const CriticalPoint* before = nullptr;
                const CriticalPoint* after = nullptr;
                for (const CriticalPoint& cp : result.criticals) {
                    if (cp.subskel != int(s) || cp.junction_node != jn) continue;
                    if (cp.side > 0) before = &cp;
                    else after = &cp;
                }
                if (!before || !after) continue;  // end junction: no bracket on this path

                std::vector<Vec3> axis =
                    axis_curve(psi.at(before->t_c), psi.tangent(before->t_c), psi.at(after->t_c),
                               psi.tangent(after->t_c), cfg.axis, 64);
                // sections restricted to the local lobe around the axis;
                // the strip arms a merged crossing drags in belong to the
                // other component. The junction ball fixes the scale.
                double depth = dfield.sample(result.skeleton.nodes[std::size_t(jn)].position);
                if (!std::isfinite(depth)) depth = vol.grid.min_spacing();
                double r_cap = 2.5 * std::max(depth, vol.grid.min_spacing());
                GeneralizedCylinder gc =
                    generalized_cylinder(before->contour, after->contour, axis, vol.grid,
                                         0.5 * vol.grid.min_spacing(), r_cap);

                json jc;
                jc["subskeleton"] = s;
                jc["junction_node"] = jn;
                jc["axis"] = axis_name(cfg.axis);
                jc["t_range"] = {before->t_c, after->t_c};
                jc["voxels"] = gc.voxels.size();
                j_cylinders.push_back(std::move(jc));
                covers.emplace_back(std::uint32_t(s) + 1, std::move(gc.voxels));
            }
        }

        // voxel -> covering components
        std::map<std::size_t, std::vector<std::uint32_t>> coverage;
        for (const auto& [label, voxels] : covers)
            for (std::size_t v : voxels)
                if (result.labels.data[v] == 0) coverage[v].push_back(label);

        // the cylinders define the rebuilt volume; within it the labels
        // follow the nearest sub-skeleton (a disc groove through a
        // neighboring tube must rejoin that tube, not its painter)
        for (const auto& [v, components] : coverage) {
            Vec3i c = vol.grid.coords(v);
            Vec3 w = vol.grid.world(c.x, c.y, c.z);
            std::uint32_t pick = components.front();
            double best_d = std::numeric_limits<double>::infinity();
            for (std::uint32_t label = 1; label <= std::uint32_t(result.subskeletons.size());
                 ++label) {
                const auto& pts = result.subskeletons[label - 1].points.points;
                double d = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < pts.size(); k += 4)
                    d = std::min(d, norm2(pts[k] - w));
                if (d < best_d) {
                    best_d = d;
                    pick = label;
                }
            }
            result.labels.data[v] = pick;
            for (std::size_t a = 0; a < components.size(); ++a)
                for (std::size_t b = a + 1; b < components.size(); ++b)
                    ++overlaps[{std::min(components[a], components[b]),
                                std::max(components[a], components[b])}];
        }
    } catch (const Error& e) {
        throw Error(std::string("reconstruct stage: ") + e.what());
    }

    fill_unlabeled(vol, result.labels, result.subskeletons);
    result.times.reconstruct_ms = ms_since(t0);
    result.times.total_ms = ms_since(t_start);

    // provenance: everything needed to audit or re-run, no timings
    json j;
    j["config"] = json::parse(config_to_json(cfg));
    j["m"] = result.m;
    j["n_parts"] = result.n_parts;
    j["n_intersections"] = result.n_intersections;
    j["branches"] = result.skeleton.branches.size();
    j["junctions"] = result.skeleton.junction_nodes().size();
    j["paths"] = json::array();
    for (const auto& path : result.partition.paths) {
        json jp;
        jp["edges"] = path.edges;
        jp["vertices"] = path.vertex_seq;
        j["paths"].push_back(std::move(jp));
    }
    j["critical_points"] = json::array();
    for (const CriticalPoint& cp : result.criticals) {
        json jc;
        jc["subskeleton"] = cp.subskel;
        jc["junction_node"] = cp.junction_node;
        jc["side"] = cp.side;
        jc["t"] = cp.t_c;
        jc["h_rho"] = cp.h_rho;
        jc["fallback"] = cp.fallback;
        j["critical_points"].push_back(std::move(jc));
    }
    j["cylinders"] = std::move(j_cylinders);
    j["failed_cuts"] = result.failed_cuts;
    j["fused_pieces"] = semantic.fused_pieces;
    j["debris_pieces"] = semantic.debris_pieces;
    j["labels"] = json::array();
    for (std::size_t s = 0; s < result.subskeletons.size(); ++s) {
        json jl;
        jl["label"] = s + 1;
        jl["path"] = result.subskeletons[s].path_id;
        json pieces = json::array();
        for (std::size_t l = 1; l < semantic.part_subskel.size(); ++l)
            if (semantic.part_subskel[l] == int(s)) pieces.push_back(l);
        jl["pieces"] = std::move(pieces);
        j["labels"].push_back(std::move(jl));
    }
    json j_overlaps = json::array();
    for (const auto& [pair, count] : overlaps)
        j_overlaps.push_back({pair.first, pair.second, count});
    j["label_overlaps"] = std::move(j_overlaps);
    result.provenance = j.dump(2);
    return result;
}

}  // namespace csd
