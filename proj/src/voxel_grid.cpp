#include "voxsynth/voxel_grid.hpp"

#include <string>

#include "voxsynth/error.hpp"

namespace voxsynth {

namespace {

constexpr std::int64_t kMaxVoxels = std::int64_t{1} << 40;

void check_geometry(const Dims& dims, const Spacing& spacing) {
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) {
        throw ValidationError("voxel grid dims must be >= 1, got " + std::to_string(dims.nx) + "x" +
                              std::to_string(dims.ny) + "x" + std::to_string(dims.nz));
    }
    if (dims.nx > kMaxVoxels / dims.ny || dims.nx * dims.ny > kMaxVoxels / dims.nz) {
        throw ValidationError("voxel grid dims overflow");
    }
    if (!(spacing.sx > 0.0) || !(spacing.sy > 0.0) || !(spacing.sz > 0.0)) {
        throw ValidationError("voxel spacing must be > 0");
    }
}

}  // namespace

VoxelGrid::VoxelGrid(Dims dims, Spacing spacing) : dims_(dims), spacing_(spacing) {
    check_geometry(dims_, spacing_);
    words_.assign(static_cast<std::size_t>((dims_.voxels() + 63) / 64), 0);
}

VoxelGrid VoxelGrid::full(Dims dims, Spacing spacing) {
    VoxelGrid g(dims, spacing);
    for (auto& w : g.words_) w = ~std::uint64_t{0};
    const std::int64_t tail = g.size() & 63;
    if (tail != 0) g.words_.back() = (std::uint64_t{1} << tail) - 1;
    return g;
}

void VoxelGrid::set_spacing(Spacing spacing) {
    check_geometry(dims_, spacing);
    spacing_ = spacing;
}

Coord VoxelGrid::coord_of(std::int64_t i) const {
    const std::int64_t x = i % dims_.nx;
    const std::int64_t rest = i / dims_.nx;
    return Coord{static_cast<std::int32_t>(x), static_cast<std::int32_t>(rest % dims_.ny),
                 static_cast<std::int32_t>(rest / dims_.ny)};
}

std::int64_t VoxelGrid::count() const {
    std::int64_t n = 0;
    for (const auto w : words_) n += std::popcount(w);
    return n;
}

std::int64_t xor_count(const VoxelGrid& a, const VoxelGrid& b) {
    if (a.dims() != b.dims()) throw ValidationError("xor_count: dims mismatch");
    const auto wa = a.words();
    const auto wb = b.words();
    std::int64_t n = 0;
    for (std::size_t i = 0; i < wa.size(); ++i) n += std::popcount(wa[i] ^ wb[i]);
    return n;
}

VoxelGrid crop(const VoxelGrid& src, Coord offset, Dims dims) {
    VoxelGrid out(dims, src.spacing());
    for (std::int64_t z = 0; z < dims.nz; ++z) {
        for (std::int64_t y = 0; y < dims.ny; ++y) {
            for (std::int64_t x = 0; x < dims.nx; ++x) {
                if (src.get_or_zero(x + offset.x, y + offset.y, z + offset.z)) out.set(x, y, z, true);
            }
        }
    }
    return out;
}

void paste(VoxelGrid& dst, const VoxelGrid& patch, Coord offset) {
    const Dims& pd = patch.dims();
    for (std::int64_t z = 0; z < pd.nz; ++z) {
        for (std::int64_t y = 0; y < pd.ny; ++y) {
            for (std::int64_t x = 0; x < pd.nx; ++x) {
                const std::int64_t gx = x + offset.x;
                const std::int64_t gy = y + offset.y;
                const std::int64_t gz = z + offset.z;
                if (dst.contains(gx, gy, gz)) dst.set(gx, gy, gz, patch.get(x, y, z));
            }
        }
    }
}

}  // namespace voxsynth
