#include "voxsynth/patches.hpp"

#include <string>

#include "voxsynth/error.hpp"

namespace voxsynth {

namespace {

/// Regular anchors 0, p, 2p, ... plus a trailing anchor at n - p when needed.
std::vector<std::int32_t> axis_anchors(std::int64_t n, std::int64_t p) {
    std::vector<std::int32_t> anchors;
    for (std::int64_t a = 0; a + p <= n; a += p) anchors.push_back(static_cast<std::int32_t>(a));
    if (n % p != 0) anchors.push_back(static_cast<std::int32_t>(n - p));
    return anchors;
}

}  // namespace

PatchLayout make_patch_layout(Dims volume_dims, Dims patch_dims, Spacing spacing) {
    if (patch_dims.nx < 1 || patch_dims.ny < 1 || patch_dims.nz < 1) {
        throw ValidationError("patch dims must be >= 1");
    }
    if (patch_dims.nx > volume_dims.nx || patch_dims.ny > volume_dims.ny || patch_dims.nz > volume_dims.nz) {
        throw ValidationError("patch " + std::to_string(patch_dims.nx) + "x" + std::to_string(patch_dims.ny) + "x" +
                              std::to_string(patch_dims.nz) + " is larger than the volume");
    }
    PatchLayout layout{volume_dims, patch_dims, spacing, {}};
    const auto xs = axis_anchors(volume_dims.nx, patch_dims.nx);
    const auto ys = axis_anchors(volume_dims.ny, patch_dims.ny);
    const auto zs = axis_anchors(volume_dims.nz, patch_dims.nz);
    for (const auto z : zs) {
        for (const auto y : ys) {
            for (const auto x : xs) layout.offsets.push_back(Coord{x, y, z});
        }
    }
    return layout;
}

std::pair<PatchLayout, std::vector<VoxelGrid>> tile_volume(const VoxelGrid& grid, Dims patch_dims) {
    PatchLayout layout = make_patch_layout(grid.dims(), patch_dims, grid.spacing());
    std::vector<VoxelGrid> patches;
    patches.reserve(layout.offsets.size());
    for (const auto& off : layout.offsets) patches.push_back(crop(grid, off, patch_dims));
    return {std::move(layout), std::move(patches)};
}

VoxelGrid stitch_volume(const PatchLayout& layout, const std::vector<VoxelGrid>& patches) {
    if (patches.size() != layout.offsets.size()) {
        throw ValidationError("stitch_volume: layout has " + std::to_string(layout.offsets.size()) +
                              " patches, got " + std::to_string(patches.size()));
    }
    VoxelGrid out(layout.volume_dims, layout.spacing);
    for (std::size_t i = 0; i < patches.size(); ++i) {
        if (patches[i].dims() != layout.patch_dims) {
            throw ValidationError("stitch_volume: patch " + std::to_string(i) + " has wrong dims");
        }
        paste(out, patches[i], layout.offsets[i]);
    }
    return out;
}

}  // namespace voxsynth
