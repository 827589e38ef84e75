#pragma once

#include <filesystem>

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

enum class VolumeFormat {
    nrrd,      ///< .nrrd (attached header) or .nhdr (detached header)
    raw_json,  ///< byte-per-voxel .raw payload plus a .json sidecar {dims, spacing, type}
};

enum class NrrdEncoding { raw, gzip };

/// Picks the format from the file extension (.nrrd/.nhdr vs .raw/.json).
VolumeFormat format_from_path(const std::filesystem::path& path);

/// Loads a binary mask. Integer payloads map nonzero to 1; floating-point
/// payloads are thresholded at 0.5. NaN voxels are rejected.
VoxelGrid load_volume(const std::filesystem::path& path, VolumeFormat format);
VoxelGrid load_volume(const std::filesystem::path& path);

/// Writes a uint8 volume. For NRRD, a `.nhdr` path produces a detached header
/// next to its payload file; any other extension gets an attached header.
void save_volume(const VoxelGrid& grid, const std::filesystem::path& path, VolumeFormat format,
                 NrrdEncoding encoding = NrrdEncoding::gzip);
void save_volume(const VoxelGrid& grid, const std::filesystem::path& path);

}  // namespace voxsynth
