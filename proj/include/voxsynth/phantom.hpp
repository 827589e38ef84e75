#pragma once

#include <cstdint>
#include <string>

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

enum class PhantomKind { sphere_shell, staircase, cube };

PhantomKind parse_phantom_kind(const std::string& s);
std::string to_string(PhantomKind k);

/// Shape parameters; each kind reads only its own fields. Lengths are in voxels.
struct PhantomParams {
    // sphere_shell: voxels with r_in <= |p - c| <= r_out, c at the volume center.
    double r_in = 0.0;
    double r_out = 0.0;
    /// Probability of toggling each voxel of the one-voxel band on either side
    /// of the surface (6-neighborhood).
    double perturb_rate = 0.0;

    // cube: centered cube of this side.
    std::int64_t side = 0;

    // staircase: columns along x, filled for z <= height(x), constant in y.
    // height(x) = base + step * x, or base + (x odd ? step : 0) when alternating.
    std::int64_t base = 1;
    std::int64_t step = 1;
    bool alternating = false;
};

/// The shell used for benchmarks and self-synthesis checks at edge length n:
/// r_in = 15n/64, r_out = 30n/64 (15/30 at 64³, 60/120 at 256³).
PhantomParams standard_shell(std::int64_t n);

/// Deterministic for equal arguments. Throws ValidationError when the shape
/// does not fit in `dims` or parameters are out of range.
VoxelGrid make_phantom(PhantomKind kind, Dims dims, const PhantomParams& params, std::uint64_t seed = 0,
                       Spacing spacing = {});

}  // namespace voxsynth
