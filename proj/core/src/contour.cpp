#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "csd/sweep.hpp"

namespace csd {

double Contour::perimeter() const {
    double p = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        p += distance(points[i], points[(i + 1) % points.size()]);
    return p;
}

double Contour::area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        a += cross(points[i], points[(i + 1) % points.size()]);
    return 0.5 * a;
}

double Contour::max_radius(const Vec2& anchor) const {
    double m = 0.0;
    for (const Vec2& p : points) m = std::max(m, distance(p, anchor));
    return m;
}

double Contour::min_radius(const Vec2& anchor) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
        m = std::min(m, point_segment_distance(anchor, points[i], points[(i + 1) % points.size()]));
    return m;
}

PlaneFrame frame_for_normal(const Vec3& origin, const Vec3& normal) {
    Vec3 n = normalized(normal);
    double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
    Vec3 e = ax <= ay && ax <= az ? Vec3{1, 0, 0} : (ay <= az ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    PlaneFrame f;
    f.origin = origin;
    f.normal = n;
    f.u = normalized(cross(e, n));
    f.v = cross(n, f.u);
    return f;
}

namespace {

bool encloses_origin(const std::vector<Vec2>& poly) {
    // even-odd ray cast along +x
    bool inside = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        if ((a.y > 0) != (b.y > 0)) {
            double x = a.x + (0.0 - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x > 0.0) inside = !inside;
        }
    }
    return inside;
}

double polygon_abs_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
    return std::abs(0.5 * a);
}

// Uniform arc-length resampling, starting at the vertex of maximal x
// (then maximal y on ties), counterclockwise.
std::vector<Vec2> resample_closed(std::vector<Vec2> poly, int n) {
    double signed_area = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        signed_area += cross(poly[i], poly[(i + 1) % poly.size()]);
    if (signed_area < 0.0) std::reverse(poly.begin(), poly.end());

    std::size_t start = 0;
    for (std::size_t i = 1; i < poly.size(); ++i) {
        if (poly[i].x > poly[start].x ||
            (poly[i].x == poly[start].x && poly[i].y > poly[start].y))
            start = i;
    }
    std::rotate(poly.begin(), poly.begin() + std::ptrdiff_t(start), poly.end());

    std::vector<double> arc(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i)
        arc[i + 1] = arc[i] + distance(poly[i], poly[(i + 1) % poly.size()]);
    double total = arc.back();
    if (total <= 0.0) throw Error("cross_section: degenerate contour");

    std::vector<Vec2> out(static_cast<std::size_t>(n));
    std::size_t seg = 0;
    for (int k = 0; k < n; ++k) {
        double s = total * double(k) / double(n);
        while (seg + 1 < poly.size() && arc[seg + 1] < s) ++seg;
        double len = arc[seg + 1] - arc[seg];
        double f = len > 0.0 ? (s - arc[seg]) / len : 0.0;
        const Vec2& a = poly[seg];
        const Vec2& b = poly[(seg + 1) % poly.size()];
        out[std::size_t(k)] = a + (b - a) * f;
    }
    return out;
}

struct SegmentSoup {
    // marching-squares vertices keyed by grid edge
    std::unordered_map<std::int64_t, int> vertex_of_edge;
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 2>> segments;

    int vertex(std::int64_t key, const Vec2& p) {
        auto [it, inserted] = vertex_of_edge.try_emplace(key, int(vertices.size()));
        if (inserted) vertices.push_back(p);
        return it->second;
    }
};

}  // namespace

Contour cross_section_in_frame(const BinaryVolume& vol, const PlaneFrame& frame, int n_samples,
                               double max_window) {
    if (n_samples < 8) throw Error("cross_section: n_samples too small");
    if (vol.sample(frame.origin) < 0.5)
        throw Error("cross_section: plane origin is outside the foreground");

    const GridShape& g = vol.grid;
    double h = 0.5 * g.min_spacing();
    double world_diag = norm(Vec3{g.dims.x * g.spacing.x, g.dims.y * g.spacing.y, g.dims.z * g.spacing.z});
    double cap = max_window > 0.0 ? std::max(max_window, 16.0 * h) : world_diag;

    for (double radius = std::min(16.0 * h, cap);; radius = std::min(radius * 2.0, cap)) {
        bool last_try = radius >= cap;

        int half = int(std::ceil(radius / h));
        int ngrid = 2 * half + 1;
        std::vector<double> field(std::size_t(ngrid) * std::size_t(ngrid));
        for (int j = 0; j < ngrid; ++j)
            for (int i = 0; i < ngrid; ++i) {
                bool border = i == 0 || j == 0 || i == ngrid - 1 || j == ngrid - 1;
                double val = 0.0;
                if (!border) {
                    Vec2 p{(i - half) * h, (j - half) * h};
                    val = vol.sample(frame.to_world(p));
                    if (!(val < std::numeric_limits<double>::infinity())) val = 0.0;
                }
                field[std::size_t(j) * std::size_t(ngrid) + std::size_t(i)] = val;
            }

        auto at = [&](int i, int j) { return field[std::size_t(j) * std::size_t(ngrid) + std::size_t(i)]; };
        auto pos = [&](int i, int j) { return Vec2{(i - half) * h, (j - half) * h}; };
        const double iso = 0.5;

        SegmentSoup soup;
        auto edge_vertex = [&](int i0, int j0, int i1, int j1) {
            // canonical key: lower corner plus orientation, shared by both cells
            int io = std::min(i0, i1), jo = std::min(j0, j1);
            int horizontal = i1 != i0 ? 1 : 0;
            std::int64_t key = (std::int64_t(jo) * ngrid + io) * 2 + horizontal;
            int ia = io, ja = jo;
            int ib = io + (horizontal ? 1 : 0), jb = jo + (horizontal ? 0 : 1);
            double v0 = at(ia, ja), v1 = at(ib, jb);
            double t = (iso - v0) / (v1 - v0);
            Vec2 a = pos(ia, ja), b = pos(ib, jb);
            return soup.vertex(key, a + (b - a) * t);
        };

        for (int j = 0; j + 1 < ngrid; ++j)
            for (int i = 0; i + 1 < ngrid; ++i) {
                // cyclic corners: (i,j) (i+1,j) (i+1,j+1) (i,j+1)
                const int ci[4] = {i, i + 1, i + 1, i};
                const int cj[4] = {j, j, j + 1, j + 1};
                bool in[4];
                int count = 0;
                for (int c = 0; c < 4; ++c) {
                    in[c] = at(ci[c], cj[c]) >= iso;
                    if (in[c]) ++count;
                }
                if (count == 0 || count == 4) continue;
                auto ev = [&](int c) {  // edge between corner c and c+1
                    int d = (c + 1) % 4;
                    return edge_vertex(ci[c], cj[c], ci[d], cj[d]);
                };
                if (count == 1 || count == 3) {
                    bool target = count == 1;
                    for (int c = 0; c < 4; ++c)
                        if (in[c] == target) {
                            soup.segments.push_back({ev((c + 3) % 4), ev(c)});
                            break;
                        }
                } else {
                    bool adjacent = false;
                    for (int c = 0; c < 4; ++c)
                        if (in[c] && in[(c + 1) % 4]) {
                            soup.segments.push_back({ev((c + 3) % 4), ev((c + 1) % 4)});
                            adjacent = true;
                            break;
                        }
                    if (!adjacent) {
                        // saddle: the cell-center average decides the pairing
                        double center = 0.25 * (at(ci[0], cj[0]) + at(ci[1], cj[1]) +
                                                at(ci[2], cj[2]) + at(ci[3], cj[3]));
                        int s = (in[0] == (center >= iso)) ? 1 : 0;
                        soup.segments.push_back({ev((s + 3) % 4), ev(s)});
                        soup.segments.push_back({ev(s + 1), ev(s + 2)});
                    }
                }
            }

        // chain segments into loops
        std::vector<std::array<int, 2>> link(soup.vertices.size(), {-1, -1});
        for (const auto& s : soup.segments) {
            auto add = [&](int a, int b) {
                if (link[std::size_t(a)][0] < 0)
                    link[std::size_t(a)][0] = b;
                else
                    link[std::size_t(a)][1] = b;
            };
            add(s[0], s[1]);
            add(s[1], s[0]);
        }

        std::vector<char> used(soup.vertices.size(), 0);
        std::vector<Vec2> best_loop;
        double best_area = std::numeric_limits<double>::infinity();
        bool clipped = false;
        double safe = (half - 2) * h;

        for (std::size_t v0 = 0; v0 < soup.vertices.size(); ++v0) {
            if (used[v0] || link[v0][0] < 0) continue;
            std::vector<int> loop;
            int cur = int(v0), prev = -1;
            while (cur >= 0 && !used[std::size_t(cur)]) {
                used[std::size_t(cur)] = 1;
                loop.push_back(cur);
                int nxt = link[std::size_t(cur)][0] != prev ? link[std::size_t(cur)][0]
                                                            : link[std::size_t(cur)][1];
                prev = cur;
                cur = nxt;
            }
            if (loop.size() < 3) continue;
            std::vector<Vec2> poly(loop.size());
            for (std::size_t k = 0; k < loop.size(); ++k) poly[k] = soup.vertices[std::size_t(loop[k])];
            if (!encloses_origin(poly)) continue;
            double area = polygon_abs_area(poly);
            if (area < best_area) {
                best_area = area;
                best_loop = std::move(poly);
                clipped = false;
                for (const Vec2& p : best_loop)
                    if (std::abs(p.x) > safe || std::abs(p.y) > safe) clipped = true;
            }
        }

        if (best_loop.empty()) {
            // nothing encloses the origin yet; a larger window may close it
            if (last_try) throw Error("cross_section: no contour encloses the plane origin");
            continue;
        }
        if (clipped && !last_try) continue;  // grow; at the cap the clipped loop stands

        Contour contour;
        contour.frame = frame;
        contour.points = resample_closed(std::move(best_loop), n_samples);
        return contour;
    }
}

Contour cross_section(const BinaryVolume& vol, const SubSkeleton& psi, double t, int n_samples,
                      double max_window) {
    Vec3 origin = psi.at(t);
    Vec3 tangent = psi.tangent(t);
    return cross_section_in_frame(vol, frame_for_normal(origin, tangent), n_samples, max_window);
}

}  // namespace csd
