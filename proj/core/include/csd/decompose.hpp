#pragma once

#include <string>
#include <vector>

#include "csd/config.hpp"
#include "csd/reconstruct.hpp"
#include "csd/skeleton_graph.hpp"

namespace csd {

struct StageTimes {
    double skeleton_ms = 0.0;
    double partition_ms = 0.0;
    double critical_ms = 0.0;
    double cut_ms = 0.0;
    double reconstruct_ms = 0.0;
    double total_ms = 0.0;
};

struct DecompositionResult {
    LabelVolume labels;           // m semantic labels over the object
    int m = 0;                    // sub-skeleton count
    int n_parts = 0;
    int n_intersections = 0;

    CurveSkeleton skeleton;
    PathPartition partition;
    std::vector<SubSkeleton> subskeletons;
    std::vector<CriticalPoint> criticals;
    std::vector<int> failed_cuts;
    std::vector<SweepTrace> traces;  // populated when requested

    StageTimes times;             // not part of provenance
    std::string provenance;       // JSON, reproducible byte for byte
};

/// Full pipeline: skeletonize, partition, sweep for critical points, cut,
/// relabel along sub-skeletons, and rebuild each component through its
/// intersections with generalized cylinders. An object with a single
/// sub-skeleton and no junctions passes through with one label.
DecompositionResult decompose(const BinaryVolume& vol, const RunConfig& cfg,
                              bool keep_traces = false);

}  // namespace csd
