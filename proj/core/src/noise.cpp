#include <random>
#include <vector>

#include "csd/volume.hpp"

namespace csd {

namespace {

const int kSix[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

}  // namespace

BinaryVolume add_impulse_noise(const BinaryVolume& vol, double density, std::uint64_t seed) {
    if (!(density >= 0.0 && density <= 1.0))
        throw Error("noise density must lie in [0,1], got " + std::to_string(density));
    if (density == 0.0) return vol;

    const GridShape& g = vol.grid;
    BinaryVolume out = vol;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Surface voxels are taken from the input in raster order; decisions
    // never depend on earlier toggles, so a fixed seed fixes the output.
    std::size_t n = g.voxel_count();
    for (std::size_t i = 0; i < n; ++i) {
        if (!vol.data[i]) continue;
        Vec3i c = g.coords(i);
        int bg_nbrs[6];
        int n_bg = 0;
        for (int k = 0; k < 6; ++k) {
            int x = c.x + kSix[k][0], y = c.y + kSix[k][1], z = c.z + kSix[k][2];
            if (!g.contains(x, y, z) || !vol.at(x, y, z)) {
                if (g.contains(x, y, z)) bg_nbrs[n_bg++] = k;
            }
        }
        bool is_surface = false;
        for (int k = 0; k < 6; ++k) {
            int x = c.x + kSix[k][0], y = c.y + kSix[k][1], z = c.z + kSix[k][2];
            if (!g.contains(x, y, z) || !vol.at(x, y, z)) { is_surface = true; break; }
        }
        if (!is_surface) continue;
        if (unit(rng) >= density) continue;

        if (unit(rng) < 0.5) {
            out.data[i] = 0;
        } else if (n_bg > 0) {
            int pick = int(std::uniform_int_distribution<int>(0, n_bg - 1)(rng));
            int k = bg_nbrs[pick];
            out.set(c.x + kSix[k][0], c.y + kSix[k][1], c.z + kSix[k][2], true);
        }
    }

    // Keep only the largest connected component; stray specks vanish.
    LabelVolume comps = connected_components(out, Connectivity::six);
    std::uint32_t n_labels = comps.max_label();
    if (n_labels > 1) {
        std::vector<std::size_t> counts(n_labels + 1, 0);
        for (std::uint32_t v : comps.data) ++counts[v];
        std::uint32_t best = 1;
        for (std::uint32_t l = 2; l <= n_labels; ++l)
            if (counts[l] > counts[best]) best = l;
        for (std::size_t i = 0; i < n; ++i) out.data[i] = comps.data[i] == best ? 1 : 0;
    }
    return out;
}

}  // namespace csd
