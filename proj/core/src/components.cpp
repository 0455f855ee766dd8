#include <vector>

#include "csd/volume.hpp"

namespace csd {

namespace {

// 6-neighborhood first so the six-connectivity case is a prefix.
const int kOffsets[26][3] = {
    {-1, 0, 0}, {1, 0, 0},  {0, -1, 0}, {0, 1, 0},  {0, 0, -1}, {0, 0, 1},
    {-1, -1, 0}, {-1, 1, 0}, {1, -1, 0}, {1, 1, 0},
    {-1, 0, -1}, {-1, 0, 1}, {1, 0, -1}, {1, 0, 1},
    {0, -1, -1}, {0, -1, 1}, {0, 1, -1}, {0, 1, 1},
    {-1, -1, -1}, {-1, -1, 1}, {-1, 1, -1}, {-1, 1, 1},
    {1, -1, -1}, {1, -1, 1}, {1, 1, -1}, {1, 1, 1},
};

}  // namespace

LabelVolume connected_components(const BinaryVolume& vol, Connectivity conn) {
    const GridShape& g = vol.grid;
    LabelVolume labels(g.dims, g.spacing);
    int n_nbrs = conn == Connectivity::six ? 6 : 26;

    std::vector<std::size_t> stack;
    std::uint32_t next = 0;
    std::size_t n = g.voxel_count();
    for (std::size_t start = 0; start < n; ++start) {
        if (!vol.data[start] || labels.data[start]) continue;
        ++next;
        labels.data[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            std::size_t cur = stack.back();
            stack.pop_back();
            Vec3i c = g.coords(cur);
            for (int k = 0; k < n_nbrs; ++k) {
                int x = c.x + kOffsets[k][0], y = c.y + kOffsets[k][1], z = c.z + kOffsets[k][2];
                if (!g.contains(x, y, z)) continue;
                std::size_t ni = g.index(x, y, z);
                if (vol.data[ni] && !labels.data[ni]) {
                    labels.data[ni] = next;
                    stack.push_back(ni);
                }
            }
        }
    }
    return labels;
}

}  // namespace csd
