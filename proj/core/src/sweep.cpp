#include <algorithm>
#include <cmath>
#include <sstream>

#include "csd/frames.hpp"
#include "csd/sweep.hpp"

namespace csd {

namespace {

double directed_sup_inf(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double sup = 0.0;
    for (const Vec2& p : a) {
        double inf = std::numeric_limits<double>::infinity();
        for (const Vec2& q : b) inf = std::min(inf, distance(p, q));
        sup = std::max(sup, inf);
    }
    return sup;
}

double directed_mean_min(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double acc = 0.0;
    for (const Vec2& p : a) {
        double inf = std::numeric_limits<double>::infinity();
        for (const Vec2& q : b) inf = std::min(inf, distance(p, q));
        acc += inf;
    }
    return a.empty() ? 0.0 : acc / double(a.size());
}

}  // namespace

double hausdorff(const Contour& c1, const Contour& c2) {
    return std::max(directed_sup_inf(c1.points, c2.points), directed_sup_inf(c2.points, c1.points));
}

double modified_hausdorff(const Contour& c1, const Contour& c2) {
    return std::max(directed_mean_min(c1.points, c2.points), directed_mean_min(c2.points, c1.points));
}

double contour_distance(const Contour& c1, const Contour& c2, ContourMetric metric) {
    return metric == ContourMetric::hausdorff ? hausdorff(c1, c2) : modified_hausdorff(c1, c2);
}

double normalized_hausdorff(const Contour& c_t, const Contour& mu, const Vec2& kappa,
                            ContourMetric metric) {
    double d = c_t.min_radius(kappa);
    if (!(d > 0.0)) throw Error("normalized_hausdorff: degenerate contour (anchor on the contour)");
    double h = contour_distance(c_t, mu, metric);
    return h / (h + d);
}

Contour mean_update(const Contour& mu, const Contour& c_new, int k, int* misses) {
    if (mu.points.size() != c_new.points.size())
        throw Error("mean_update: contours must share the sample count");
    if (k < 1) throw Error("mean_update: visit count must be >= 1");

    std::size_t n = mu.points.size();
    Contour out = mu;
    int missed = 0;
    double w = 1.0 / double(k + 1);

    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = mu.points[i];
        Vec2 tangent = normalized(mu.points[(i + 1) % n] - mu.points[(i + n - 1) % n]);
        Vec2 normal = perp_cw(tangent);  // outward for counterclockwise contours

        // nearest intersection of the normal line with the new contour
        double best_s = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2& a = c_new.points[j];
            const Vec2& b = c_new.points[(j + 1) % n];
            Vec2 e = b - a;
            double denom = cross(normal, e);
            if (std::abs(denom) < 1e-15) continue;
            double s = cross(a - p, e) / denom;
            double u = cross(a - p, normal) / denom;
            if (u >= 0.0 && u < 1.0 && std::abs(s) < std::abs(best_s)) best_s = s;
        }

        if (std::isfinite(best_s)) {
            out.points[i] = p + normal * (best_s * w);
        } else {
            ++missed;
            double best_d = std::numeric_limits<double>::infinity();
            Vec2 best_q = p;
            for (std::size_t j = 0; j < n; ++j) {
                const Vec2& a = c_new.points[j];
                const Vec2& b = c_new.points[(j + 1) % n];
                Vec2 e = b - a;
                double len2 = norm2(e);
                double t = len2 > 0 ? std::clamp(dot(p - a, e) / len2, 0.0, 1.0) : 0.0;
                Vec2 q = a + e * t;
                double d = distance(p, q);
                if (d < best_d) {
                    best_d = d;
                    best_q = q;
                }
            }
            out.points[i] = p + (best_q - p) * w;
        }
    }
    if (misses) *misses = missed;
    return out;
}

std::vector<DecompositionInterval> decomposition_intervals(const SubSkeleton& psi,
                                                           const ScalarField& dfield,
                                                           double alpha_s, double alpha_e) {
    if (!(alpha_s >= 1.0)) throw Error("decomposition_intervals: alpha_s must be >= 1");
    if (!(alpha_e >= 0.0)) throw Error("decomposition_intervals: alpha_e must be >= 0");
    if (alpha_s < alpha_e) throw Error("decomposition_intervals: alpha_s must be >= alpha_e");

    std::vector<DecompositionInterval> out;
    double total = psi.total_length();
    double end_tol = 0.5 * dfield.grid.min_spacing();

    for (std::size_t k = 0; k < psi.junction_ts.size(); ++k) {
        double t_j = psi.junction_ts[k];
        Vec3 at = psi.at(t_j);
        double r = dfield.sample(at);
        if (!(r > 0.0) || !std::isfinite(r))
            throw Error("decomposition_intervals: distance undefined at junction parameter " +
                        std::to_string(t_j));

        double s_j = t_j * total;
        double r_s = alpha_s * r, r_e = alpha_e * r;
        bool at_start = s_j <= end_tol;
        bool at_end = total - s_j <= end_tol;

        if (!at_start) {
            DecompositionInterval iv;
            iv.subskel = psi.path_id;
            iv.junction_node = psi.junction_nodes[k];
            iv.t_j = t_j;
            iv.side = +1;
            iv.t_s = std::max(s_j - r_s, 0.0) / total;
            iv.t_e = std::max(s_j - r_e, 0.0) / total;
            iv.r = r;
            out.push_back(iv);
        }
        if (!at_end) {
            DecompositionInterval iv;
            iv.subskel = psi.path_id;
            iv.junction_node = psi.junction_nodes[k];
            iv.t_j = t_j;
            iv.side = -1;
            iv.t_s = std::min(s_j + r_s, total) / total;
            iv.t_e = std::min(s_j + r_e, total) / total;
            iv.r = r;
            out.push_back(iv);
        }
    }
    return out;
}

std::vector<CriticalPoint> find_critical_points(const BinaryVolume& vol, const SubSkeleton& psi,
                                                const std::vector<DecompositionInterval>& intervals,
                                                const SweepParams& params,
                                                std::vector<SweepTrace>* traces) {
    if (!(params.theta_h > 0.0 && params.theta_h < 1.0))
        throw Error("find_critical_points: theta_h must lie in (0,1)");
    if (params.sf < 1) throw Error("find_critical_points: sampling factor must be >= 1");

    std::vector<CriticalPoint> out;
    double total = psi.total_length();
    double base_arc = vol.grid.min_spacing();
    double step_arc = base_arc * double(params.sf);

    for (const DecompositionInterval& iv : intervals) {
        double s_begin = iv.t_s * total;
        double s_end = iv.t_e * total;
        double dir = s_end >= s_begin ? 1.0 : -1.0;
        double span = std::abs(s_end - s_begin);
        int n_points = int(span / step_arc) + 1;
        double window = 4.0 * std::max(iv.r, 2.0 * vol.grid.min_spacing());

        struct Sample {
            double t;
            Contour contour;
            double h_rho;
            PlaneFrame frame;
            std::optional<Contour> mu_before;  // mean the sample was compared against
        };
        std::vector<Sample> samples;
        samples.reserve(std::size_t(n_points));

        SweepTrace trace;
        trace.interval = iv;

        auto section_at = [&](double t, const std::optional<PlaneFrame>& from,
                              PlaneFrame& frame_out) -> std::optional<Contour> {
            try {
                Vec3 origin = psi.at(t);
                Vec3 tangent = psi.tangent(t);
                frame_out = from ? transport_frame(*from, origin, tangent)
                                 : frame_for_normal(origin, tangent);
                return cross_section_in_frame(vol, frame_out, params.n_samples, window);
            } catch (const Error&) {
                return std::nullopt;  // no valid section (noise dents, clamped ends)
            }
        };

        std::optional<Contour> mu;
        std::optional<PlaneFrame> prev_frame;
        int folded = 0;
        std::optional<CriticalPoint> hit;

        auto make_cp = [&](double t, const Contour& c, double h, bool fallback) {
            CriticalPoint cp;
            cp.subskel = iv.subskel;
            cp.junction_node = iv.junction_node;
            cp.side = iv.side;
            cp.t_c = t;
            cp.contour = c;
            cp.h_rho = h;
            cp.fallback = fallback;
            return cp;
        };

        // refined scan between two arc positions against a fixed mean;
        // first triggering point wins, else the maximal H_rho
        auto refine = [&](double s_from, double s_to, const PlaneFrame& frame_from,
                          const Contour& mu_ref, bool stop_at_theta) {
            struct Refined {
                double t;
                Contour contour;
                double h_rho;
            };
            std::vector<Refined> pts;
            std::optional<PlaneFrame> f = frame_from;
            double sign = s_to >= s_from ? 1.0 : -1.0;
            for (double s = s_from + sign * base_arc; sign * (s_to - s) > 1e-9;
                 s += sign * base_arc) {
                double t = total > 0 ? s / total : 0.0;
                PlaneFrame frame;
                auto c = section_at(t, f, frame);
                if (!c) continue;
                f = frame;
                double h = normalized_hausdorff(*c, mu_ref, {0, 0}, params.metric);
                pts.push_back({t, std::move(*c), h});
                if (stop_at_theta && h >= params.theta_h) break;
            }
            return pts;
        };

        for (int k = 0; k < n_points && !hit; ++k) {
            double s = s_begin + dir * double(k) * step_arc;
            double t = total > 0 ? s / total : 0.0;

            PlaneFrame frame;
            auto contour = section_at(t, prev_frame, frame);
            if (!contour) continue;
            prev_frame = frame;

            if (!mu) {
                mu = *contour;
                folded = 1;
                samples.push_back({t, std::move(*contour), 0.0, frame, std::nullopt});
                trace.samples.push_back({t, 0.0, false});
                continue;
            }

            double h_rho = normalized_hausdorff(*contour, *mu, {0, 0}, params.metric);
            samples.push_back({t, *contour, h_rho, frame, mu});
            bool triggered = h_rho >= params.theta_h;
            trace.samples.push_back({t, h_rho, triggered});

            if (triggered) {
                CriticalPoint cp = make_cp(t, *contour, h_rho, false);
                if (params.sf > 1 && samples.size() >= 2) {
                    // the trigger may have happened anywhere in the last
                    // coarse step; find the earliest unit-step trigger
                    const Sample& before = samples[samples.size() - 2];
                    auto refined = refine(before.t * total, t * total, before.frame, *mu, true);
                    for (const auto& rp : refined)
                        if (rp.h_rho >= params.theta_h) {
                            cp = make_cp(rp.t, rp.contour, rp.h_rho, false);
                            break;
                        }
                }
                hit = cp;
            } else {
                mu = mean_update(*mu, *contour, folded);
                ++folded;
            }
        }

        if (!hit && samples.empty())
            throw Error("find_critical_points: interval holds no valid cross-section (junction node " +
                        std::to_string(iv.junction_node) + ")");

        if (!hit) {
            // fallback: the admissible point nearest the junction, at
            // least r of arc away from it (the sweep is allowed no closer)
            double s_j = iv.t_j * total;
            auto arc_dist = [&](double t) { return std::abs(t * total - s_j); };
            int best = -1;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                if (arc_dist(samples[i].t) < iv.r) continue;
                if (best < 0 || arc_dist(samples[i].t) < arc_dist(samples[std::size_t(best)].t) ||
                    (arc_dist(samples[i].t) == arc_dist(samples[std::size_t(best)].t) &&
                     samples[i].h_rho > samples[std::size_t(best)].h_rho))
                    best = int(i);
            }
            if (best < 0) {
                // fully clamped interval: nothing admissible, use the best overall
                for (std::size_t i = 0; i < samples.size(); ++i)
                    if (best < 0 || samples[i].h_rho > samples[std::size_t(best)].h_rho) best = int(i);
            }
            const Sample& b = samples[std::size_t(best)];
            CriticalPoint cp = make_cp(b.t, b.contour, b.h_rho, true);

            if (params.sf > 1 && b.mu_before && std::size_t(best) + 1 < samples.size() &&
                samples[std::size_t(best) + 1].mu_before) {
                // the coarse grid may have stopped early; unit steps toward
                // the junction can come closer while staying admissible
                auto refined = refine(b.t * total, samples[std::size_t(best) + 1].t * total, b.frame,
                                      *samples[std::size_t(best) + 1].mu_before, false);
                for (const auto& rp : refined) {
                    if (arc_dist(rp.t) < iv.r) continue;
                    if (arc_dist(rp.t) < arc_dist(cp.t_c))
                        cp = make_cp(rp.t, rp.contour, rp.h_rho, true);
                }
            }
            hit = cp;
        }

        out.push_back(std::move(*hit));
        if (traces) traces->push_back(std::move(trace));
    }
    return out;
}

std::string sweep_trace_csv(const SweepTrace& trace) {
    std::ostringstream os;
    os << "t,h_rho,triggered\n";
    os.precision(10);
    for (const SweepSample& s : trace.samples)
        os << s.t << "," << s.h_rho << "," << (s.triggered ? 1 : 0) << "\n";
    return os.str();
}

}  // namespace csd
