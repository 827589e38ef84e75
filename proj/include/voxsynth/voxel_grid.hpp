#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace voxsynth {

struct Dims {
    std::int64_t nx = 1;
    std::int64_t ny = 1;
    std::int64_t nz = 1;

    std::int64_t voxels() const { return nx * ny * nz; }
    bool operator==(const Dims&) const = default;
};

struct Spacing {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    bool operator==(const Spacing&) const = default;
};

/// Integer voxel coordinate. Ordered z-major (z, then y, then x), which is
/// also the raster order of linear indices.
struct Coord {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t z = 0;

    bool operator==(const Coord&) const = default;
    friend bool operator<(const Coord& a, const Coord& b) {
        if (a.z != b.z) return a.z < b.z;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    }
};

/// Bit-packed binary occupancy grid.
///
/// Voxels are stored one bit each in raster order (x fastest, then y, then z),
/// little-endian within 64-bit words: voxel i lives in bit (i % 64) of word
/// (i / 64). Bits past the last voxel are always zero, so word-level popcount
/// and XOR are exact.
class VoxelGrid {
public:
    VoxelGrid() : VoxelGrid(Dims{1, 1, 1}) {}
    explicit VoxelGrid(Dims dims, Spacing spacing = {});

    static VoxelGrid full(Dims dims, Spacing spacing = {});

    const Dims& dims() const { return dims_; }
    const Spacing& spacing() const { return spacing_; }
    void set_spacing(Spacing spacing);

    std::int64_t size() const { return dims_.voxels(); }

    bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < dims_.nx && y < dims_.ny && z < dims_.nz;
    }
    std::int64_t linear(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return x + dims_.nx * (y + dims_.ny * z);
    }
    Coord coord_of(std::int64_t linear_index) const;

    bool get(std::int64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    bool get(std::int64_t x, std::int64_t y, std::int64_t z) const { return get(linear(x, y, z)); }
    bool get(const Coord& c) const { return get(c.x, c.y, c.z); }

    /// Out-of-bounds reads return 0 (background).
    bool get_or_zero(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return contains(x, y, z) && get(x, y, z);
    }

    void set(std::int64_t i, bool value) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }
    void set(std::int64_t x, std::int64_t y, std::int64_t z, bool value) { set(linear(x, y, z), value); }
    void set(const Coord& c, bool value) { set(c.x, c.y, c.z, value); }

    /// Number of occupied voxels.
    std::int64_t count() const;
    double occupancy_rate() const { return static_cast<double>(count()) / static_cast<double>(size()); }
    bool empty() const { return count() == 0; }

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> mutable_words() { return words_; }

    /// Calls fn(linear_index) for every occupied voxel in raster order.
    template <typename Fn>
    void for_each_set(Fn&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                const int b = std::countr_zero(bits);
                fn(static_cast<std::int64_t>(w * 64 + b));
                bits &= bits - 1;
            }
        }
    }

    bool same_geometry(const VoxelGrid& other) const {
        return dims_ == other.dims_ && spacing_ == other.spacing_;
    }

    bool operator==(const VoxelGrid& other) const = default;

private:
    Dims dims_;
    Spacing spacing_;
    std::vector<std::uint64_t> words_;
};

/// Number of voxels that differ between two grids of equal dims.
std::int64_t xor_count(const VoxelGrid& a, const VoxelGrid& b);

/// Copies the box [offset, offset + dims) of `src` into a new grid; cells
/// outside `src` read as 0.
VoxelGrid crop(const VoxelGrid& src, Coord offset, Dims dims);

/// Writes `patch` into `dst` at `offset`, overwriting. Cells falling outside
/// `dst` are dropped.
void paste(VoxelGrid& dst, const VoxelGrid& patch, Coord offset);

}  // namespace voxsynth
