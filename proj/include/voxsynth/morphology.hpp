#pragma once

#include <cstdint>
#include <vector>

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

/// complete AND NOT defective, voxel-wise. Used to extract an implant from a
/// completed shape and its defective input.
VoxelGrid subtract(const VoxelGrid& complete, const VoxelGrid& defective);

/// 26-connected component labels (0 = background, components numbered from 1
/// in raster order of their first voxel) and the voxel count of each label.
struct ComponentLabels {
    std::vector<std::int32_t> labels;
    std::vector<std::int64_t> sizes;  ///< sizes[0] unused
    std::int32_t count() const { return static_cast<std::int32_t>(sizes.size()) - 1; }
};
ComponentLabels label_components(const VoxelGrid& grid);

/// Cubic structuring element of half-width `radius`. Outside the volume
/// counts as background.
VoxelGrid erode(const VoxelGrid& grid, int radius);
VoxelGrid dilate(const VoxelGrid& grid, int radius);

struct KeepPolicy {
    enum class Mode { largest_component, min_size } mode = Mode::largest_component;
    std::int64_t min_size = 1;

    static KeepPolicy largest() { return {}; }
    static KeepPolicy at_least(std::int64_t n) { return {Mode::min_size, n}; }
};

/// Drops components failing `keep`, then applies a morphological opening of
/// half-width `morph_radius` (0 disables the opening).
VoxelGrid denoise(const VoxelGrid& grid, KeepPolicy keep, int morph_radius);

}  // namespace voxsynth
