#pragma once

#include <string>

#include "csd/volume.hpp"

namespace csd {

/// Segmentation-comparison metrics over the union of the nonzero supports
/// of two labelings; a voxel labeled in only one input contributes with
/// label 0 in the other.
struct MetricReport {
    double rand_error = 0.0;      // 1 - Rand index over voxel pairs
    double voi = 0.0;             // H(A|B) + H(B|A), nats
    double boundary_error = 0.0;  // symmetric mean boundary distance, world units
    bool boundary_degenerate = false;  // one input had no internal boundary

    std::string to_json() const;
    std::string to_csv_row() const;
    static std::string csv_header();
};

/// 1 - Rand index from the label contingency table (no pair loop).
double rand_error(const LabelVolume& a, const LabelVolume& b);

/// Variation of information in nats.
double voi(const LabelVolume& a, const LabelVolume& b);

/// Symmetric mean distance between internal label boundaries (faces
/// between differently labeled foreground voxels). Distances at or below
/// `tol` voxels count as zero. When one labeling has no internal boundary
/// the defined direction alone is reported.
double boundary_error(const LabelVolume& a, const LabelVolume& b, double tol = 0.0,
                      bool* degenerate = nullptr);

MetricReport evaluate_labelings(const LabelVolume& a, const LabelVolume& b, double boundary_tol = 0.0);

}  // namespace csd
