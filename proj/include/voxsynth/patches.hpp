#pragma once

#include <utility>
#include <vector>

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

/// Fixed-size patch tiling of a volume.
///
/// Offsets are ordered z-layer by z-layer, then y, then x. Regular layers
/// come first; when nz is not a multiple of pz, one extra layer anchored at
/// z = nz - pz is appended last and overlaps the layer below it. The same
/// anchoring rule applies within a layer when nx or ny is not a multiple of
/// the patch size. Stitching pastes patches in offset order, so later
/// patches overwrite earlier ones where they overlap.
struct PatchLayout {
    Dims volume_dims;
    Dims patch_dims;
    Spacing spacing;
    std::vector<Coord> offsets;
};

PatchLayout make_patch_layout(Dims volume_dims, Dims patch_dims, Spacing spacing = {});

std::pair<PatchLayout, std::vector<VoxelGrid>> tile_volume(const VoxelGrid& grid, Dims patch_dims);

VoxelGrid stitch_volume(const PatchLayout& layout, const std::vector<VoxelGrid>& patches);

}  // namespace voxsynth
