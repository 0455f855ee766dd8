#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "csd/volume.hpp"

namespace csd {

namespace {

// Cell corner offsets, bit order (x, y, z).
const int kCorner[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1},
};

// Six cell faces as cyclic corner quads.
const int kFace[6][4] = {
    {0, 2, 6, 4},  // -x
    {1, 5, 7, 3},  // +x
    {0, 4, 5, 1},  // -y
    {2, 3, 7, 6},  // +y
    {0, 1, 3, 2},  // -z
    {4, 6, 7, 5},  // +z
};

// A cell edge is identified globally by its lower corner and axis so
// vertices weld across cells.
struct EdgeKey {
    std::int64_t packed;
    bool operator==(const EdgeKey& o) const { return packed == o.packed; }
};

struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& k) const { return std::hash<std::int64_t>()(k.packed); }
};

EdgeKey make_edge_key(int x0, int y0, int z0, int axis) {
    // padded coords stay well under 2^20 per axis
    std::int64_t p = ((std::int64_t(z0) * (1 << 20) + y0) * (1 << 20) + x0) * 4 + axis;
    return {p};
}

int edge_axis(int ca, int cb) {
    if (kCorner[ca][0] != kCorner[cb][0]) return 0;
    if (kCorner[ca][1] != kCorner[cb][1]) return 1;
    return 2;
}

struct MeshBuilder {
    const GridShape* grid = nullptr;
    double iso = 0.5;
    TriangleMesh mesh;
    std::unordered_map<std::int64_t, std::uint32_t> edge_vertex;

    // Vertex on the edge between padded corners a and b; linear interpolation.
    std::uint32_t vertex_for(const EdgeKey& key, const Vec3i& a, const Vec3i& b, double va, double vb) {
        auto it = edge_vertex.find(key.packed);
        if (it != edge_vertex.end()) return it->second;
        double t = (iso - va) / (vb - va);
        Vec3 pa{(a.x - 1.0) * grid->spacing.x, (a.y - 1.0) * grid->spacing.y, (a.z - 1.0) * grid->spacing.z};
        Vec3 pb{(b.x - 1.0) * grid->spacing.x, (b.y - 1.0) * grid->spacing.y, (b.z - 1.0) * grid->spacing.z};
        Vec3 p = pa + (pb - pa) * t;
        std::uint32_t id = std::uint32_t(mesh.vertices.size());
        mesh.vertices.push_back(p);
        edge_vertex.emplace(key.packed, id);
        return id;
    }
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * norm(cross(b - a, c - a));
}

template <typename Field>
TriangleMesh march(const GridShape& grid, double iso, Field value) {
    MeshBuilder mb;
    mb.grid = &grid;
    mb.iso = iso;

    // Padded corner lattice: corner (x,y,z) carries voxel (x-1,y-1,z-1),
    // background outside, so solids close at the volume border.
    auto corner_value = [&](int x, int y, int z) -> double {
        if (x < 1 || y < 1 || z < 1 || x > grid.dims.x || y > grid.dims.y || z > grid.dims.z)
            return 0.0;
        return value(x - 1, y - 1, z - 1);
    };

    int cx = grid.dims.x + 1, cy = grid.dims.y + 1, cz = grid.dims.z + 1;
    std::vector<std::pair<EdgeKey, EdgeKey>> segments;
    std::unordered_map<EdgeKey, std::array<EdgeKey, 2>, EdgeKeyHash> links;
    std::unordered_map<EdgeKey, int, EdgeKeyHash> link_count;

    for (int z = 0; z < cz; ++z)
        for (int y = 0; y < cy; ++y)
            for (int x = 0; x < cx; ++x) {
                double v[8];
                bool in[8];
                int mask = 0;
                for (int c = 0; c < 8; ++c) {
                    v[c] = corner_value(x + kCorner[c][0], y + kCorner[c][1], z + kCorner[c][2]);
                    in[c] = v[c] >= iso;
                    if (in[c]) mask |= 1 << c;
                }
                if (mask == 0 || mask == 0xff) continue;

                auto key_of = [&](int ca, int cb) {
                    int axis = edge_axis(ca, cb);
                    int ex = x + std::min(kCorner[ca][0], kCorner[cb][0]);
                    int ey = y + std::min(kCorner[ca][1], kCorner[cb][1]);
                    int ez = z + std::min(kCorner[ca][2], kCorner[cb][2]);
                    return make_edge_key(ex, ey, ez, axis);
                };

                // Collect iso segments face by face.
                segments.clear();
                for (const auto& f : kFace) {
                    bool fin[4];
                    int fmask = 0, count = 0;
                    for (int i = 0; i < 4; ++i) {
                        fin[i] = in[f[i]];
                        if (fin[i]) { fmask |= 1 << i; ++count; }
                    }
                    if (count == 0 || count == 4) continue;
                    auto fedge = [&](int i) { return key_of(f[i], f[(i + 1) % 4]); };
                    if (count == 1 || count == 3) {
                        bool target = count == 1;
                        for (int i = 0; i < 4; ++i)
                            if (fin[i] == target) {
                                segments.emplace_back(fedge((i + 3) % 4), fedge(i));
                                break;
                            }
                    } else if (fmask == 0b0011 || fmask == 0b0110 || fmask == 0b1100 || fmask == 0b1001) {
                        for (int i = 0; i < 4; ++i)
                            if (fin[i] && fin[(i + 1) % 4]) {
                                segments.emplace_back(fedge((i + 3) % 4), fedge((i + 1) % 4));
                                break;
                            }
                    } else {
                        // Diagonal saddle; the face-center average decides, so
                        // both cells sharing the face resolve it identically.
                        double center = 0.25 * (v[f[0]] + v[f[1]] + v[f[2]] + v[f[3]]);
                        bool center_in = center >= iso;
                        int start = (fin[0] == center_in) ? 1 : 0;  // pair edges around the minority corners
                        segments.emplace_back(fedge((start + 3) % 4), fedge(start));
                        segments.emplace_back(fedge(start + 1), fedge(start + 2));
                    }
                }
                if (segments.empty()) continue;

                // Each cut cell edge belongs to exactly two faces, so the
                // segments chain into disjoint closed loops.
                links.clear();
                link_count.clear();
                for (auto& s : segments) {
                    auto& la = links[s.first];
                    la[std::size_t(link_count[s.first]++)] = s.second;
                    auto& lb = links[s.second];
                    lb[std::size_t(link_count[s.second]++)] = s.first;
                }

                std::unordered_map<EdgeKey, bool, EdgeKeyHash> used;
                for (auto& s : segments) {
                    if (used[s.first]) continue;
                    std::vector<EdgeKey> loop;
                    EdgeKey cur = s.first, prev = cur;
                    while (true) {
                        loop.push_back(cur);
                        used[cur] = true;
                        const auto& nbrs = links[cur];
                        EdgeKey next = (!(nbrs[0] == prev) && !used[nbrs[0]]) ? nbrs[0]
                                      : (!used[nbrs[1]] ? nbrs[1] : nbrs[0]);
                        if (used[next]) {
                            if (next == s.first && loop.size() >= 3) break;  // closed
                            break;
                        }
                        prev = cur;
                        cur = next;
                    }
                    if (loop.size() < 3) continue;

                    // Materialize vertices.
                    std::vector<std::uint32_t> vids(loop.size());
                    for (std::size_t i = 0; i < loop.size(); ++i) {
                        // recover the two corners from the key
                        std::int64_t packed = loop[i].packed;
                        int axis = int(packed & 3);
                        std::int64_t rest = packed >> 2;
                        int ex = int(rest % (1 << 20));
                        rest /= (1 << 20);
                        int ey = int(rest % (1 << 20));
                        int ez = int(rest / (1 << 20));
                        Vec3i a{ex, ey, ez}, b = a;
                        (axis == 0 ? b.x : axis == 1 ? b.y : b.z) += 1;
                        vids[i] = mb.vertex_for(loop[i], a, b, corner_value(a.x, a.y, a.z),
                                                corner_value(b.x, b.y, b.z));
                    }

                    // Orient outward: the occupancy gradient points inward.
                    Vec3 newell{0, 0, 0};
                    for (std::size_t i = 0; i < vids.size(); ++i) {
                        const Vec3& p = mb.mesh.vertices[vids[i]];
                        const Vec3& q = mb.mesh.vertices[vids[(i + 1) % vids.size()]];
                        newell += cross(p, q);
                    }
                    Vec3 inward{0, 0, 0};
                    Vec3 cell_center{(x - 0.5) * grid.spacing.x, (y - 0.5) * grid.spacing.y,
                                     (z - 0.5) * grid.spacing.z};
                    for (int c = 0; c < 8; ++c)
                        if (in[c]) {
                            Vec3 pc{(x + kCorner[c][0] - 1.0) * grid.spacing.x,
                                    (y + kCorner[c][1] - 1.0) * grid.spacing.y,
                                    (z + kCorner[c][2] - 1.0) * grid.spacing.z};
                            inward += pc - cell_center;
                        }
                    bool flip = dot(newell, inward) > 0.0;

                    for (std::size_t i = 1; i + 1 < vids.size(); ++i) {
                        std::uint32_t t0 = vids[0];
                        std::uint32_t t1 = flip ? vids[i + 1] : vids[i];
                        std::uint32_t t2 = flip ? vids[i] : vids[i + 1];
                        if (triangle_area(mb.mesh.vertices[t0], mb.mesh.vertices[t1],
                                          mb.mesh.vertices[t2]) <= 1e-12)
                            continue;
                        mb.mesh.triangles.push_back({t0, t1, t2});
                    }
                }
            }

    return std::move(mb.mesh);
}

}  // namespace

TriangleMesh marching_cubes(const BinaryVolume& vol, double iso) {
    if (vol.foreground_count() == 0) throw Error("marching_cubes: empty volume");
    return march(vol.grid, iso,
                 [&](int x, int y, int z) { return double(vol.data[vol.grid.index(x, y, z)]); });
}

TriangleMesh marching_cubes(const LabelVolume& labels, std::uint32_t label, double iso) {
    if (label == 0) throw Error("marching_cubes: label 0 is background");
    bool present = false;
    for (std::uint32_t v : labels.data)
        if (v == label) { present = true; break; }
    if (!present) throw Error("marching_cubes: label " + std::to_string(label) + " absent from volume");
    return march(labels.grid, iso, [&](int x, int y, int z) {
        return labels.data[labels.grid.index(x, y, z)] == label ? 1.0 : 0.0;
    });
}

}  // namespace csd
