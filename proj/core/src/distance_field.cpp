#include <cmath>
#include <limits>
#include <vector>

#include "csd/volume.hpp"

namespace csd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (x - x_i)^2 + f(i) sampled at x_q = q*h.
// Parabolas with infinite height are skipped.
void edt_1d(std::vector<double>& f, std::vector<double>& out, std::vector<int>& v,
            std::vector<double>& z, int n, double h) {
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[std::size_t(q)] == kInf) continue;
        double xq = q * h;
        double s;
        while (k >= 0) {
            double xv = v[std::size_t(k)] * h;
            s = ((f[std::size_t(q)] + xq * xq) - (f[std::size_t(v[std::size_t(k)])] + xv * xv)) /
                (2.0 * xq - 2.0 * xv);
            if (s <= z[std::size_t(k)]) {
                --k;
            } else {
                break;
            }
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
        } else {
            ++k;
            v[std::size_t(k)] = q;
            z[std::size_t(k)] = s;
        }
        z[std::size_t(k) + 1] = kInf;
    }
    if (k < 0) {
        for (int q = 0; q < n; ++q) out[std::size_t(q)] = kInf;
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        double xq = q * h;
        while (z[std::size_t(j) + 1] < xq) ++j;
        double d = xq - v[std::size_t(j)] * h;
        out[std::size_t(q)] = d * d + f[std::size_t(v[std::size_t(j)])];
    }
}

}  // namespace

ScalarField distance_field(const BinaryVolume& vol) {
    std::size_t fg = vol.foreground_count();
    if (fg == 0) throw Error("distance_field: volume has no foreground voxel");
    if (fg == vol.grid.voxel_count())
        throw Error("distance_field: all-foreground volume has no boundary");

    const GridShape& g = vol.grid;
    int nx = g.dims.x, ny = g.dims.y, nz = g.dims.z;

    ScalarField field(g.dims, g.spacing);
    std::vector<double>& d2 = field.data;
    for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = vol.data[i] ? kInf : 0.0;

    auto nmax = std::size_t(std::max(nx, std::max(ny, nz)));
    std::vector<double> f(nmax), out(nmax);
    std::vector<int> v(nmax);
    std::vector<double> z(nmax + 1);

    // x pass
    for (int zz = 0; zz < nz; ++zz)
        for (int yy = 0; yy < ny; ++yy) {
            std::size_t base = g.index(0, yy, zz);
            for (int xx = 0; xx < nx; ++xx) f[std::size_t(xx)] = d2[base + std::size_t(xx)];
            edt_1d(f, out, v, z, nx, g.spacing.x);
            for (int xx = 0; xx < nx; ++xx) d2[base + std::size_t(xx)] = out[std::size_t(xx)];
        }
    // y pass
    std::size_t sy = std::size_t(nx);
    for (int zz = 0; zz < nz; ++zz)
        for (int xx = 0; xx < nx; ++xx) {
            std::size_t base = g.index(xx, 0, zz);
            for (int yy = 0; yy < ny; ++yy) f[std::size_t(yy)] = d2[base + sy * std::size_t(yy)];
            edt_1d(f, out, v, z, ny, g.spacing.y);
            for (int yy = 0; yy < ny; ++yy) d2[base + sy * std::size_t(yy)] = out[std::size_t(yy)];
        }
    // z pass
    std::size_t sz = std::size_t(nx) * std::size_t(ny);
    for (int yy = 0; yy < ny; ++yy)
        for (int xx = 0; xx < nx; ++xx) {
            std::size_t base = g.index(xx, yy, 0);
            for (int zz = 0; zz < nz; ++zz) f[std::size_t(zz)] = d2[base + sz * std::size_t(zz)];
            edt_1d(f, out, v, z, nz, g.spacing.z);
            for (int zz = 0; zz < nz; ++zz) d2[base + sz * std::size_t(zz)] = out[std::size_t(zz)];
        }

    for (double& val : d2) val = std::sqrt(val);
    return field;
}

}  // namespace csd
