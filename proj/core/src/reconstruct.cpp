#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "csd/frames.hpp"
#include "csd/reconstruct.hpp"

namespace csd {

namespace {

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
    bool inside = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        if ((a.y > p.y) != (b.y > p.y)) {
            double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x > p.x) inside = !inside;
        }
    }
    return inside;
}

double distance_to_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i)
        best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
    return best;
}

const int kSix[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

}  // namespace

Cut make_cut(const BinaryVolume& vol, const CriticalPoint& cp) {
    Cut cut;
    cut.critical = cp;
    const GridShape& g = vol.grid;
    const PlaneFrame& f = cp.contour.frame;
    double half_thick = 0.5 * g.min_spacing();
    double rim = 0.75 * g.min_spacing();  // covers voxelization error at the contour edge

    // bounding box of the contour in world space, inflated by the slab
    double r_max = cp.contour.max_radius() + 2.0 * g.min_spacing();
    Vec3 lo = f.origin, hi = f.origin;
    for (int sx = -1; sx <= 1; sx += 2)
        for (int sy = -1; sy <= 1; sy += 2) {
            Vec3 corner = f.origin + f.u * (sx * r_max) + f.v * (sy * r_max);
            lo = {std::min(lo.x, corner.x), std::min(lo.y, corner.y), std::min(lo.z, corner.z)};
            hi = {std::max(hi.x, corner.x), std::max(hi.y, corner.y), std::max(hi.z, corner.z)};
        }
    int x0 = std::max(0, int(std::floor(lo.x / g.spacing.x)) - 1);
    int y0 = std::max(0, int(std::floor(lo.y / g.spacing.y)) - 1);
    int z0 = std::max(0, int(std::floor(lo.z / g.spacing.z)) - 1);
    int x1 = std::min(g.dims.x - 1, int(std::ceil(hi.x / g.spacing.x)) + 1);
    int y1 = std::min(g.dims.y - 1, int(std::ceil(hi.y / g.spacing.y)) + 1);
    int z1 = std::min(g.dims.z - 1, int(std::ceil(hi.z / g.spacing.z)) + 1);

    for (int z = z0; z <= z1; ++z)
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                std::size_t i = g.index(x, y, z);
                if (!vol.data[i]) continue;
                Vec3 w = g.world(x, y, z);
                double dn = dot(w - f.origin, f.normal);
                if (std::abs(dn) > half_thick) continue;
                Vec2 p = f.to_plane(w);
                if (point_in_polygon(cp.contour.points, p) ||
                    distance_to_polygon(cp.contour.points, p) <= rim)
                    cut.disc_voxels.push_back(i);
            }
    return cut;
}

CutResult cut_object(const BinaryVolume& vol, CutSet& cuts, const std::vector<Vec3>& junctions) {
    const GridShape& g = vol.grid;
    BinaryVolume remainder = vol;
    std::size_t fg = 0;
    for (std::size_t i = 0; i < vol.data.size(); ++i) fg += vol.data[i] ? 1 : 0;
    for (const Cut& cut : cuts)
        for (std::size_t i : cut.disc_voxels) remainder.data[i] = 0;

    CutResult result;
    result.pieces = connected_components(remainder, Connectivity::six);
    std::uint32_t n_pieces = result.pieces.max_label();

    // Two discs meeting at a crossing isolate tiny corner slivers of the
    // overlap region; dissolve anything far below part scale so they
    // rejoin their neighborhood during reconstruction instead of counting
    // as parts.
    {
        std::size_t floor = std::max<std::size_t>(8, fg / 1000);
        std::vector<std::size_t> sizes(n_pieces + 1, 0);
        for (std::uint32_t v : result.pieces.data) ++sizes[v];
        std::vector<char> keep(n_pieces + 1, 1);
        bool any_dropped = false;
        for (std::uint32_t l = 1; l <= n_pieces; ++l)
            if (sizes[l] < floor) {
                keep[l] = 0;
                any_dropped = true;
            }
        if (any_dropped) {
            for (std::uint32_t& v : result.pieces.data)
                if (v && !keep[v]) v = 0;
            n_pieces = result.pieces.compact_labels();
        }
    }

    // a piece is an intersection iff it contains a junction point
    std::vector<char> is_intersection(n_pieces + 1, 0);
    for (const Vec3& j : junctions) {
        Vec3 gc = g.to_grid(j);
        int x = int(std::lround(gc.x)), y = int(std::lround(gc.y)), z = int(std::lround(gc.z));
        if (!g.contains(x, y, z)) continue;
        std::uint32_t label = result.pieces.at(x, y, z);
        if (label == 0) {
            // the junction voxel sits on a removed disc; use the nearest
            // labeled voxel in a small window
            double best_d = std::numeric_limits<double>::infinity();
            for (int dz = -2; dz <= 2; ++dz)
                for (int dy = -2; dy <= 2; ++dy)
                    for (int dx = -2; dx <= 2; ++dx) {
                        int nx = x + dx, ny = y + dy, nz = z + dz;
                        if (!g.contains(nx, ny, nz)) continue;
                        std::uint32_t l = result.pieces.at(nx, ny, nz);
                        if (l == 0) continue;
                        double d = distance(j, g.world(nx, ny, nz));
                        if (d < best_d) {
                            best_d = d;
                            label = l;
                        }
                    }
        }
        if (label != 0) is_intersection[label] = 1;
    }

    for (std::uint32_t l = 1; l <= n_pieces; ++l) {
        if (is_intersection[l]) {
            result.intersection_labels.push_back(l);
            ++result.n_intersections;
        } else {
            ++result.n_parts;
        }
    }

    // a useful cut touches at least two distinct pieces
    for (std::size_t c = 0; c < cuts.size(); ++c) {
        std::unordered_set<std::uint32_t> touched;
        for (std::size_t i : cuts[c].disc_voxels) {
            Vec3i v = g.coords(i);
            for (const auto& o : kSix) {
                int x = v.x + o[0], y = v.y + o[1], z = v.z + o[2];
                if (!g.contains(x, y, z)) continue;
                std::uint32_t l = result.pieces.at(x, y, z);
                if (l) touched.insert(l);
            }
        }
        cuts[c].separates = touched.size() >= 2;
        if (!cuts[c].separates) result.failed_cuts.push_back(int(c));
    }
    return result;
}

SemanticAssignment label_semantic(const CutResult& cut, const std::vector<SubSkeleton>& subskels,
                                  const std::vector<CriticalPoint>& criticals) {
    const GridShape& g = cut.pieces.grid;
    std::uint32_t n_pieces = cut.pieces.max_label();

    std::vector<char> is_intersection(n_pieces + 1, 0);
    for (std::uint32_t l : cut.intersection_labels) is_intersection[l] = 1;

    // per sub-skeleton: the t ranges bracketed by critical points around
    // each junction; arc inside them is intersection volume
    std::vector<std::vector<std::pair<double, double>>> zones(subskels.size());
    for (std::size_t s = 0; s < subskels.size(); ++s) {
        const SubSkeleton& psi = subskels[s];
        for (std::size_t k = 0; k < psi.junction_nodes.size(); ++k) {
            int jn = psi.junction_nodes[k];
            double lo = -1.0, hi = 2.0;
            bool have_lo = false, have_hi = false;
            for (const CriticalPoint& cp : criticals) {
                if (cp.subskel != int(s) || cp.junction_node != jn) continue;
                if (cp.side > 0) {
                    lo = cp.t_c;
                    have_lo = true;
                } else {
                    hi = cp.t_c;
                    have_hi = true;
                }
            }
            if (!have_lo && !have_hi) continue;
            if (!have_lo) lo = psi.junction_ts[k] <= hi ? std::min(psi.junction_ts[k], hi) : 0.0;
            if (!have_hi) hi = std::max(psi.junction_ts[k], lo);
            zones[s].emplace_back(std::min(lo, hi), std::max(lo, hi));
        }
    }
    auto in_zone = [&](std::size_t s, double t) {
        for (const auto& [lo, hi] : zones[s])
            if (t >= lo && t <= hi) return true;
        return false;
    };

    // arc of each sub-skeleton inside each piece, split by zone membership
    std::vector<std::vector<double>> arc_out(n_pieces + 1,
                                             std::vector<double>(subskels.size(), 0.0));
    std::vector<std::vector<double>> arc_all(n_pieces + 1,
                                             std::vector<double>(subskels.size(), 0.0));
    double ds = 0.5 * g.min_spacing();
    for (std::size_t s = 0; s < subskels.size(); ++s) {
        double total = subskels[s].total_length();
        int n = std::max(2, int(total / ds));
        for (int k = 0; k <= n; ++k) {
            double t = double(k) / double(n);
            Vec3 p = subskels[s].at(t);
            Vec3 gc = g.to_grid(p);
            int x = int(std::lround(gc.x)), y = int(std::lround(gc.y)), z = int(std::lround(gc.z));
            if (!g.contains(x, y, z)) continue;
            std::uint32_t label = cut.pieces.at(x, y, z);
            if (!label) continue;
            arc_all[label][s] += total / double(n);
            if (!in_zone(s, t)) arc_out[label][s] += total / double(n);
        }
    }

    SemanticAssignment out;
    out.labels = LabelVolume(g.dims, g.spacing);
    out.part_subskel.assign(n_pieces + 1, -1);

    double floor = 3.0 * g.min_spacing();
    std::vector<std::vector<int>> qualifying(n_pieces + 1);
    for (std::uint32_t l = 1; l <= n_pieces; ++l) {
        if (is_intersection[l]) continue;
        for (std::size_t s = 0; s < subskels.size(); ++s)
            if (arc_out[l][s] >= floor) qualifying[l].push_back(int(s));

        int best = -1;
        for (std::size_t s = 0; s < subskels.size(); ++s)
            if (arc_out[l][s] > 0 && (best < 0 || arc_out[l][s] > arc_out[l][std::size_t(best)]))
                best = int(s);
        if (best < 0)
            for (std::size_t s = 0; s < subskels.size(); ++s)
                if (arc_all[l][s] > 0 && (best < 0 || arc_all[l][s] > arc_all[l][std::size_t(best)]))
                    best = int(s);
        out.part_subskel[l] = best;

        if (qualifying[l].size() >= 2)
            out.fused_pieces.push_back(int(l));
        else if (qualifying[l].empty())
            out.debris_pieces.push_back(int(l));  // all arc inside a junction's bracket
    }

    // one part per maximal stretch of a sub-skeleton outside its brackets:
    // the cut planes of crossing tubes subdivide the solid further, but
    // those slivers stay segments of the same part
    out.n_parts_effective = 0;
    for (std::size_t s = 0; s < subskels.size(); ++s) {
        std::vector<std::pair<double, double>> zs = zones[s];
        std::sort(zs.begin(), zs.end());
        double t_floor = subskels[s].total_length() > 0
                             ? floor / subskels[s].total_length()
                             : 1.0;
        double cursor = 0.0;
        for (const auto& [lo, hi] : zs) {
            if (lo - cursor >= t_floor) ++out.n_parts_effective;
            cursor = std::max(cursor, hi);
        }
        if (1.0 - cursor >= t_floor) ++out.n_parts_effective;
    }

    std::vector<char> is_fused(n_pieces + 1, 0);
    for (int l : out.fused_pieces) is_fused[std::size_t(l)] = 1;
    std::vector<char> is_debris(n_pieces + 1, 0);
    for (int l : out.debris_pieces) is_debris[std::size_t(l)] = 1;

    for (std::size_t i = 0; i < cut.pieces.data.size(); ++i) {
        std::uint32_t l = cut.pieces.data[i];
        if (!l || is_intersection[l] || is_debris[l]) continue;
        if (!is_fused[l]) {
            int s = out.part_subskel[l];
            if (s >= 0) out.labels.data[i] = std::uint32_t(s) + 1;
            continue;
        }
        // fused piece: nearest qualifying sub-skeleton wins, voxel by voxel
        Vec3i c = g.coords(i);
        Vec3 w = g.world(c.x, c.y, c.z);
        int best = qualifying[l].front();
        double best_d = std::numeric_limits<double>::infinity();
        for (int s : qualifying[l]) {
            const auto& pts = subskels[std::size_t(s)].points.points;
            for (std::size_t k = 0; k < pts.size(); k += 4) {  // quarter-voxel steps; stride is plenty
                double d2 = norm2(pts[k] - w);
                if (d2 < best_d) {
                    best_d = d2;
                    best = s;
                }
            }
        }
        out.labels.data[i] = std::uint32_t(best) + 1;
    }
    return out;
}

std::pair<Contour, Contour> align_contours(const Contour& c1, const Contour& c2) {
    if (c1.points.size() != c2.points.size())
        throw Error("align_contours: contours must share the sample count");
    std::size_t n = c1.points.size();

    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_shift = 0;
    bool best_flip = false;

    for (int flip = 0; flip < 2; ++flip) {
        for (std::size_t shift = 0; shift < n; ++shift) {
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = flip ? (n - ((i + shift) % n)) % n : (i + shift) % n;
                cost += norm2(c1.points[i] - c2.points[j]);
                if (cost >= best_cost) break;
            }
            if (cost < best_cost) {
                best_cost = cost;
                best_shift = shift;
                best_flip = flip != 0;
            }
        }
    }

    Contour aligned = c2;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = best_flip ? (n - ((i + best_shift) % n)) % n : (i + best_shift) % n;
        aligned.points[i] = c2.points[j];
    }
    return {c1, aligned};
}

Contour linear_homotopy(const Contour& c1, const Contour& c2, double u) {
    if (c1.points.size() != c2.points.size())
        throw Error("linear_homotopy: contours must share the sample count");
    if (u == 0.0) return c1;
    if (u == 1.0) return c2;
    Contour out = c1;
    for (std::size_t i = 0; i < c1.points.size(); ++i)
        out.points[i] = c1.points[i] * (1.0 - u) + c2.points[i] * u;
    return out;
}

std::vector<Vec3> axis_curve(const Vec3& p1, const Vec3& tan1, const Vec3& p2, const Vec3& tan2,
                             AxisKind kind, int n_samples) {
    if (distance(p1, p2) <= 0.0) throw Error("axis_curve: coincident endpoints");
    if (n_samples < 2) throw Error("axis_curve: need at least two samples");
    double chord = distance(p1, p2);

    std::vector<Vec3> out(static_cast<std::size_t>(n_samples));
    switch (kind) {
        case AxisKind::linear: {
            for (int k = 0; k < n_samples; ++k) {
                double u = double(k) / double(n_samples - 1);
                out[std::size_t(k)] = p1 + (p2 - p1) * u;
            }
            break;
        }
        case AxisKind::spline: {
            Vec3 m1 = normalized(tan1), m2 = normalized(tan2);
            if (norm(m1) == 0.0 || norm(m2) == 0.0)
                throw Error("axis_curve: spline needs nonzero end tangents");
            if (chord < 1e-9 && dot(m1, m2) < 0)
                throw Error("axis_curve: degenerate spline (antiparallel tangents, coincident points)");
            Vec3 t1 = m1 * chord, t2 = m2 * chord;
            for (int k = 0; k < n_samples; ++k) {
                double u = double(k) / double(n_samples - 1);
                double u2 = u * u, u3 = u2 * u;
                double h00 = 2 * u3 - 3 * u2 + 1;
                double h10 = u3 - 2 * u2 + u;
                double h01 = -2 * u3 + 3 * u2;
                double h11 = u3 - u2;
                out[std::size_t(k)] = p1 * h00 + t1 * h10 + p2 * h01 + t2 * h11;
            }
            break;
        }
        case AxisKind::sine: {
            // in-plane bump with zero end slope; axis leaves and enters
            // along the chord
            Vec3 dir = normalized(p2 - p1);
            Vec3 ref = std::abs(dir.x) <= std::abs(dir.y) && std::abs(dir.x) <= std::abs(dir.z)
                           ? Vec3{1, 0, 0}
                           : (std::abs(dir.y) <= std::abs(dir.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
            Vec3 w = normalized(cross(dir, ref));
            double amp = 0.25 * chord;
            for (int k = 0; k < n_samples; ++k) {
                double u = double(k) / double(n_samples - 1);
                double b = std::sin(M_PI * u);
                out[std::size_t(k)] = p1 + (p2 - p1) * u + w * (amp * b * b);
            }
            break;
        }
    }
    return out;
}

GeneralizedCylinder generalized_cylinder(const Contour& c1, const Contour& c2,
                                         const std::vector<Vec3>& axis, const GridShape& grid,
                                         double du, double r_cap) {
    if (axis.size() < 2) throw Error("generalized_cylinder: axis needs at least two points");
    if (du > 0.5 * grid.min_spacing() + 1e-12)
        throw Error("generalized_cylinder: du must be at most half a voxel");

    // resample the axis at du spacing
    std::vector<double> arc(axis.size(), 0.0);
    for (std::size_t i = 1; i < axis.size(); ++i)
        arc[i] = arc[i - 1] + distance(axis[i - 1], axis[i]);
    double total = arc.back();
    int n = std::max(2, int(std::ceil(total / du)) + 1);
    std::vector<Vec3> pts(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double s = total * double(k) / double(n - 1);
        auto it = std::lower_bound(arc.begin(), arc.end(), s);
        std::size_t i = std::size_t(std::max<std::ptrdiff_t>(1, it - arc.begin()));
        i = std::min(i, axis.size() - 1);
        double seg = arc[i] - arc[i - 1];
        double f = seg > 0 ? (s - arc[i - 1]) / seg : 0.0;
        pts[std::size_t(k)] = axis[i - 1] + (axis[i] - axis[i - 1]) * f;
    }

    // transport the first contour's frame along the axis; when the end
    // section is tilted against the axis (a path bending through its
    // junction), keep the start frame axis-aligned and project the contour
    Vec3 tangent0 = normalized(pts[1] - pts[0]);
    PlaneFrame start;
    if (dot(normalized(c1.frame.normal), tangent0) >= std::cos(45.0 * M_PI / 180.0)) {
        start = c1.frame;
        start.origin = pts.front();
    } else {
        start = frame_for_normal(pts.front(), tangent0);
    }
    GeneralizedCylinder gc;
    gc.frames = rotation_minimizing_frames(pts, start);

    for (std::size_t k = 1; k < gc.frames.size(); ++k) {
        if (dot(gc.frames[k].normal, gc.frames[k - 1].normal) < std::cos(45.0 * M_PI / 180.0))
            throw Error("generalized_cylinder: frame discontinuity above 45 degrees; du too coarse");
    }

    // both end contours projected into the transported frames, then the
    // parametrizations aligned
    Contour c1_local = c1;
    for (std::size_t i = 0; i < c1.points.size(); ++i)
        c1_local.points[i] = gc.frames.front().to_plane(c1.frame.to_world(c1.points[i]));
    c1_local.frame = gc.frames.front();
    const PlaneFrame& end = gc.frames.back();
    Contour c2_local = c2;
    for (std::size_t i = 0; i < c2.points.size(); ++i)
        c2_local.points[i] = end.to_plane(c2.frame.to_world(c2.points[i]));
    c2_local.frame = end;
    auto [a1, a2] = align_contours(c1_local, c2_local);

    // sweep and rasterize: voxel centers within each slab project into the
    // section polygon; slabs at du spacing with du/2 reach tile the axis
    std::unordered_set<std::size_t> voxels;
    double slab_arc = n > 1 ? total / double(n - 1) : total;
    double half_reach = 0.5 * slab_arc + 1e-9;
    for (int k = 0; k < n; ++k) {
        double u = n > 1 ? double(k) / double(n - 1) : 0.0;
        Contour section = linear_homotopy(a1, a2, u);
        const PlaneFrame& f = gc.frames[std::size_t(k)];

        double r_max = section.max_radius() + grid.min_spacing();
        Vec3 lo = f.origin, hi = f.origin;
        for (int sy = -1; sy <= 1; sy += 2)
            for (int sx = -1; sx <= 1; sx += 2) {
                for (const Vec3& corner :
                     {f.origin + f.u * (sx * r_max) + f.v * (sy * r_max) + f.normal * half_reach,
                      f.origin + f.u * (sx * r_max) + f.v * (sy * r_max) - f.normal * half_reach}) {
                    lo = {std::min(lo.x, corner.x), std::min(lo.y, corner.y), std::min(lo.z, corner.z)};
                    hi = {std::max(hi.x, corner.x), std::max(hi.y, corner.y), std::max(hi.z, corner.z)};
                }
            }
        int x0 = std::max(0, int(std::floor(lo.x / grid.spacing.x)));
        int y0 = std::max(0, int(std::floor(lo.y / grid.spacing.y)));
        int z0 = std::max(0, int(std::floor(lo.z / grid.spacing.z)));
        int x1 = std::min(grid.dims.x - 1, int(std::ceil(hi.x / grid.spacing.x)));
        int y1 = std::min(grid.dims.y - 1, int(std::ceil(hi.y / grid.spacing.y)));
        int z1 = std::min(grid.dims.z - 1, int(std::ceil(hi.z / grid.spacing.z)));

        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    Vec3 w = grid.world(x, y, z);
                    double dn = dot(w - f.origin, f.normal);
                    if (std::abs(dn) > half_reach) continue;
                    Vec2 p = f.to_plane(w - f.normal * dn);
                    if (r_cap > 0.0 && norm(p) > r_cap) continue;
                    if (point_in_polygon(section.points, p))
                        voxels.insert(grid.index(x, y, z));
                }
    }
    gc.voxels.assign(voxels.begin(), voxels.end());
    std::sort(gc.voxels.begin(), gc.voxels.end());
    return gc;
}

}  // namespace csd
