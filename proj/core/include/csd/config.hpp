#pragma once

#include <cstdint>
#include <string>

#include "csd/reconstruct.hpp"
#include "csd/sweep.hpp"

namespace csd {

/// Pipeline parameters. theta_c is configured in degrees (values above
/// 180 force singleton paths); everything else in natural units.
struct RunConfig {
    double alpha_s = 10.0;
    double alpha_e = 1.0;
    double theta_h = 0.8;
    double theta_c_deg = 0.0;
    ContourMetric metric = ContourMetric::modified;
    int sf = 1;
    AxisKind axis = AxisKind::linear;
    double min_branch_length = 0.0;  // 0 = automatic (twice the deepest radius)
    int max_branches = 64;
    int n_samples = 128;
    std::uint64_t seed = 0;
    int threads = 1;  // batch execution width; not part of provenance

    double theta_c_rad() const;
    void validate() const;
};

std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);

std::string metric_name(ContourMetric m);
ContourMetric metric_from_name(const std::string& name);
std::string axis_name(AxisKind k);
AxisKind axis_from_name(const std::string& name);

}  // namespace csd
