#pragma once

#include <array>
#include <cstdint>
#include <map>

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

/// Surface step statistics, a measure of staircase ("terracing") artifacts.
///
/// For each height axis and both directions along it, every column
/// perpendicular to the other two axes yields a height: its outermost
/// occupied voxel in that direction. Columns whose outermost voxel touches
/// the volume boundary, or which are empty, have no surface crossing and are
/// skipped. Neighboring columns with a nonzero height difference contribute
/// |difference| to the histogram. A derivative sign flip is counted whenever
/// two consecutive nonzero differences along a row of columns disagree in
/// sign.
struct StepHistogram {
    /// counts[axis][step] for the height axis that produced the step.
    std::array<std::map<int, std::int64_t>, 3> counts;
    std::int64_t derivative_sign_flips = 0;

    std::int64_t total() const;
    /// Occurrence-weighted mean step size; 0 when there are no steps.
    double mean_step() const;
    std::map<int, std::int64_t> combined() const;
};

StepHistogram terracing_stats(const VoxelGrid& grid);

}  // namespace voxsynth
