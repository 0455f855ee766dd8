#include <cmath>
#include <fstream>

#include "csd/config.hpp"
#include "json.hpp"

namespace csd {

using nlohmann::json;

double RunConfig::theta_c_rad() const { return theta_c_deg * M_PI / 180.0; }

void RunConfig::validate() const {
    if (!(alpha_s >= 1.0)) throw Error("config: alpha_s must be >= 1");
    if (!(alpha_e >= 0.0)) throw Error("config: alpha_e must be >= 0");
    if (alpha_s < alpha_e) throw Error("config: alpha_s must be >= alpha_e");
    if (!(theta_h > 0.0 && theta_h < 1.0)) throw Error("config: theta_h must lie in (0,1)");
    if (!(theta_c_deg >= 0.0 && theta_c_deg <= 181.0))
        throw Error("config: theta_c must lie in [0,181] degrees");
    if (sf < 1) throw Error("config: sf must be >= 1");
    if (max_branches < 1) throw Error("config: max_branches must be >= 1");
    if (n_samples < 8) throw Error("config: n_samples must be >= 8");
    if (threads < 1) throw Error("config: threads must be >= 1");
}

std::string metric_name(ContourMetric m) {
    return m == ContourMetric::hausdorff ? "hausdorff" : "modified";
}

ContourMetric metric_from_name(const std::string& name) {
    if (name == "hausdorff") return ContourMetric::hausdorff;
    if (name == "modified" || name == "mhd") return ContourMetric::modified;
    throw Error("config: unknown metric '" + name + "' (hausdorff | modified)");
}

std::string axis_name(AxisKind k) {
    switch (k) {
        case AxisKind::linear: return "linear";
        case AxisKind::spline: return "spline";
        case AxisKind::sine: return "sine";
    }
    return "linear";
}

AxisKind axis_from_name(const std::string& name) {
    if (name == "linear") return AxisKind::linear;
    if (name == "spline") return AxisKind::spline;
    if (name == "sine") return AxisKind::sine;
    throw Error("config: unknown axis kind '" + name + "' (linear | spline | sine)");
}

std::string config_to_json(const RunConfig& cfg) {
    // threads is an execution width, not a result parameter; leaving it out
    // keeps provenance identical across worker counts
    json j;
    j["alpha_s"] = cfg.alpha_s;
    j["alpha_e"] = cfg.alpha_e;
    j["theta_h"] = cfg.theta_h;
    j["theta_c"] = cfg.theta_c_deg;
    j["metric"] = metric_name(cfg.metric);
    j["sf"] = cfg.sf;
    j["axis"] = axis_name(cfg.axis);
    j["min_branch_length"] = cfg.min_branch_length;
    j["max_branches"] = cfg.max_branches;
    j["n_samples"] = cfg.n_samples;
    j["seed"] = cfg.seed;
    return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, true, true);
    RunConfig cfg;
    cfg.alpha_s = j.value("alpha_s", cfg.alpha_s);
    cfg.alpha_e = j.value("alpha_e", cfg.alpha_e);
    cfg.theta_h = j.value("theta_h", cfg.theta_h);
    cfg.theta_c_deg = j.value("theta_c", cfg.theta_c_deg);
    if (j.contains("metric")) cfg.metric = metric_from_name(j["metric"].get<std::string>());
    cfg.sf = j.value("sf", cfg.sf);
    if (j.contains("axis")) cfg.axis = axis_from_name(j["axis"].get<std::string>());
    cfg.min_branch_length = j.value("min_branch_length", cfg.min_branch_length);
    cfg.max_branches = j.value("max_branches", cfg.max_branches);
    cfg.n_samples = j.value("n_samples", cfg.n_samples);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json(text);
}

}  // namespace csd
