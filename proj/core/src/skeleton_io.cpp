#include <fstream>

#include "csd/skeleton.hpp"
#include "json.hpp"

namespace csd {

using nlohmann::json;

std::string skeleton_to_json(const CurveSkeleton& skel) {
    json j;
    j["branches"] = json::array();
    for (std::size_t b = 0; b < skel.branches.size(); ++b) {
        json jb;
        jb["id"] = b;
        jb["nodes"] = {skel.branch_nodes[b][0], skel.branch_nodes[b][1]};
        jb["length"] = skel.branches[b].length();
        json pts = json::array();
        for (const Vec3& p : skel.branches[b].points) pts.push_back({p.x, p.y, p.z});
        jb["points"] = std::move(pts);
        j["branches"].push_back(std::move(jb));
    }
    j["nodes"] = json::array();
    for (std::size_t n = 0; n < skel.nodes.size(); ++n) {
        json jn;
        jn["id"] = n;
        jn["type"] = skel.node_type(int(n)) == NodeType::junction ? "junction" : "end";
        const Vec3& p = skel.nodes[n].position;
        jn["position"] = {p.x, p.y, p.z};
        jn["branches"] = skel.nodes[n].incident;
        j["nodes"].push_back(std::move(jn));
    }
    return j.dump(2);
}

CurveSkeleton skeleton_from_json(const std::string& text) {
    json j = json::parse(text);
    CurveSkeleton skel;
    for (const auto& jn : j.at("nodes")) {
        SkeletonNode node;
        node.position = {jn["position"][0].get<double>(), jn["position"][1].get<double>(),
                         jn["position"][2].get<double>()};
        skel.nodes.push_back(std::move(node));
    }
    for (const auto& jb : j.at("branches")) {
        Polyline poly;
        for (const auto& jp : jb.at("points"))
            poly.push_back({jp[0].get<double>(), jp[1].get<double>(), jp[2].get<double>()});
        skel.branches.push_back(std::move(poly));
        skel.branch_nodes.push_back({jb["nodes"][0].get<int>(), jb["nodes"][1].get<int>()});
    }
    for (std::size_t b = 0; b < skel.branches.size(); ++b) {
        skel.nodes[std::size_t(skel.branch_nodes[b][0])].incident.push_back(int(b));
        skel.nodes[std::size_t(skel.branch_nodes[b][1])].incident.push_back(int(b));
    }
    return skel;
}

void save_skeleton(const CurveSkeleton& skel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << skeleton_to_json(skel) << "\n";
}

CurveSkeleton load_skeleton(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return skeleton_from_json(text);
}

}  // namespace csd
