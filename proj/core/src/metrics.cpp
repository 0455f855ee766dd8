#include <cmath>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "csd/metrics.hpp"
#include "json.hpp"

namespace csd {

namespace {

void check_dims(const LabelVolume& a, const LabelVolume& b) {
    if (!(a.grid.dims == b.grid.dims))
        throw Error("metrics: label volumes have mismatched dims");
}

// Contingency table over the union of nonzero supports.
struct Contingency {
    std::unordered_map<std::uint64_t, double> joint;
    std::unordered_map<std::uint32_t, double> row, col;
    double n = 0.0;
};

Contingency contingency(const LabelVolume& a, const LabelVolume& b) {
    Contingency c;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        std::uint32_t la = a.data[i], lb = b.data[i];
        if (la == 0 && lb == 0) continue;
        c.joint[(std::uint64_t(la) << 32) | lb] += 1.0;
        c.row[la] += 1.0;
        c.col[lb] += 1.0;
        c.n += 1.0;
    }
    return c;
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double rand_error(const LabelVolume& a, const LabelVolume& b) {
    check_dims(a, b);
    Contingency c = contingency(a, b);
    if (c.n < 2.0) return 0.0;

    double same_both = 0.0, same_a = 0.0, same_b = 0.0;
    for (const auto& [key, cnt] : c.joint) same_both += choose2(cnt);
    for (const auto& [la, cnt] : c.row) same_a += choose2(cnt);
    for (const auto& [lb, cnt] : c.col) same_b += choose2(cnt);

    double total = choose2(c.n);
    double tp = same_both;
    double tn = total - same_a - same_b + tp;
    return 1.0 - (tp + tn) / total;
}

double voi(const LabelVolume& a, const LabelVolume& b) {
    check_dims(a, b);
    Contingency c = contingency(a, b);
    if (c.n <= 0.0) return 0.0;

    auto entropy = [&](const std::unordered_map<std::uint32_t, double>& hist) {
        double h = 0.0;
        for (const auto& [label, cnt] : hist) {
            double p = cnt / c.n;
            h -= p * std::log(p);
        }
        return h;
    };
    double h_joint = 0.0;
    for (const auto& [key, cnt] : c.joint) {
        double p = cnt / c.n;
        h_joint -= p * std::log(p);
    }
    double v = 2.0 * h_joint - entropy(c.row) - entropy(c.col);
    return v < 0.0 ? 0.0 : v;  // clamp -0 noise
}

namespace {

// Internal label boundaries as face centers on a doubled grid: a face
// between differently labeled foreground voxels lands on an integer
// doubled-grid point.
std::vector<std::size_t> boundary_faces(const LabelVolume& vol, const GridShape& doubled) {
    const GridShape& g = vol.grid;
    std::vector<std::size_t> faces;
    const int off[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int z = 0; z < g.dims.z; ++z)
        for (int y = 0; y < g.dims.y; ++y)
            for (int x = 0; x < g.dims.x; ++x) {
                std::uint32_t l = vol.at(x, y, z);
                if (!l) continue;
                for (const auto& o : off) {
                    int nx = x + o[0], ny = y + o[1], nz = z + o[2];
                    if (!g.contains(nx, ny, nz)) continue;
                    std::uint32_t ln = vol.at(nx, ny, nz);
                    if (!ln || ln == l) continue;
                    faces.push_back(doubled.index(2 * x + o[0], 2 * y + o[1], 2 * z + o[2]));
                }
            }
    return faces;
}

}  // namespace

double boundary_error(const LabelVolume& a, const LabelVolume& b, double tol, bool* degenerate) {
    check_dims(a, b);
    const GridShape& g = a.grid;
    GridShape doubled;
    doubled.dims = {2 * g.dims.x - 1, 2 * g.dims.y - 1, 2 * g.dims.z - 1};
    doubled.spacing = {g.spacing.x / 2.0, g.spacing.y / 2.0, g.spacing.z / 2.0};

    std::vector<std::size_t> fa = boundary_faces(a, doubled);
    std::vector<std::size_t> fb = boundary_faces(b, doubled);
    if (degenerate) *degenerate = fa.empty() != fb.empty();
    if (fa.empty() && fb.empty()) return 0.0;

    double tol_world = tol * g.min_spacing();

    auto directed_mean = [&](const std::vector<std::size_t>& from,
                             const std::vector<std::size_t>& to) -> double {
        if (from.empty() || to.empty()) return 0.0;
        BinaryVolume mask(doubled.dims, doubled.spacing);
        for (std::uint8_t& v : mask.data) v = 1;
        for (std::size_t i : to) mask.data[i] = 0;  // targets become "background"
        ScalarField dist = distance_field(mask);
        double acc = 0.0;
        for (std::size_t i : from) {
            double d = dist.data[i];
            acc += d <= tol_world ? 0.0 : d;
        }
        return acc / double(from.size());
    };

    // one side without internal boundary: only the vacuous direction is
    // defined, so the distance degenerates to zero (flagged above)
    if (fa.empty() || fb.empty()) return 0.0;
    return 0.5 * (directed_mean(fa, fb) + directed_mean(fb, fa));
}

MetricReport evaluate_labelings(const LabelVolume& a, const LabelVolume& b, double boundary_tol) {
    MetricReport r;
    r.rand_error = rand_error(a, b);
    r.voi = voi(a, b);
    r.boundary_error = boundary_error(a, b, boundary_tol, &r.boundary_degenerate);
    return r;
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["rand_error"] = rand_error;
    j["voi"] = voi;
    j["boundary_error"] = boundary_error;
    j["boundary_degenerate"] = boundary_degenerate;
    return j.dump(2);
}

std::string MetricReport::csv_header() { return "rand_error,voi,boundary_error"; }

std::string MetricReport::to_csv_row() const {
    std::ostringstream os;
    os.precision(12);
    os << rand_error << "," << voi << "," << boundary_error;
    return os.str();
}

}  // namespace csd
