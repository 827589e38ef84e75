#pragma once

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

enum class Smoothing {
    gaussian,  ///< separable Gaussian (3 taps per axis) followed by 2x2x2 averaging
    mean,      ///< plain 2x2x2 block average
};

enum class InterpOrder { nearest, trilinear, cubic_spline };

struct DownsampleOptions {
    Smoothing smoothing = Smoothing::gaussian;
    double sigma = 0.8;
};

/// Halves every dimension. The smoothed field is binarized at 0.5 with ties
/// mapping to 1. Spacing doubles. Kernels are renormalized at the volume
/// border, so constant fields stay constant.
VoxelGrid downsample2x(const VoxelGrid& grid, const DownsampleOptions& options = {});
inline VoxelGrid downsample2x(const VoxelGrid& grid, Smoothing smoothing) {
    return downsample2x(grid, DownsampleOptions{smoothing, 0.8});
}

/// Multiplies every dimension by `factor` (a power of two >= 2), interpolates,
/// and binarizes at 0.5. Output voxel j samples the input at (j + 0.5) / factor - 0.5.
VoxelGrid upsample_interp(const VoxelGrid& grid, int factor, InterpOrder order);

struct PaddedGrid {
    VoxelGrid grid;
    Dims original;
};

/// Zero-pads at the high end of each axis up to the next multiple of 2^levels.
PaddedGrid pad_to_pow2(const VoxelGrid& grid, int levels);

/// Crops the low corner [0, dims) out of `grid`.
VoxelGrid crop_to(const VoxelGrid& grid, Dims dims);

}  // namespace voxsynth
