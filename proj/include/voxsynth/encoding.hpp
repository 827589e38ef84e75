#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

/// Neighborhood edge length: 3 (27-bit keys) or 5 (125-bit keys).
enum class NeighborhoodSize : int { three = 3, five = 5 };

inline int key_width(NeighborhoodSize s) {
    const int n = static_cast<int>(s);
    return n * n * n;
}
inline int neighborhood_radius(NeighborhoodSize s) { return static_cast<int>(s) / 2; }

NeighborhoodSize neighborhood_from_int(int size);

/// Fixed-width bit string encoding a cubic voxel neighborhood.
///
/// Bit i holds the voxel at offset (dx, dy, dz) in [-r, r]^3 with
/// i = (dz + r) * (2r + 1)^2 + (dy + r) * (2r + 1) + (dx + r), so the center
/// voxel sits at bit (width - 1) / 2. Bits at and above `width` are zero.
class BitKey {
public:
    static constexpr int kMaxWidth = 128;

    BitKey() = default;
    explicit BitKey(int width);
    static BitKey from_words(int width, std::uint64_t lo, std::uint64_t hi = 0);
    static BitKey all_ones(int width);

    int width() const { return width_; }
    int words_used() const { return (width_ + 63) / 64; }
    const std::array<std::uint64_t, 2>& words() const { return words_; }

    bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(int i, bool value = true) {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= m;
        } else {
            words_[i >> 6] &= ~m;
        }
    }
    void flip(int i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    int popcount() const { return std::popcount(words_[0]) + std::popcount(words_[1]); }
    bool center() const { return test((width_ - 1) / 2); }
    BitKey complement() const;

    bool operator==(const BitKey&) const = default;

    template <typename H>
    friend H AbslHashValue(H h, const BitKey& k) {
        return H::combine(std::move(h), k.words_[0], k.words_[1], k.width_);
    }

private:
    std::array<std::uint64_t, 2> words_{};
    int width_ = 27;
};

/// popcount(a XOR b). Throws ValidationError on width mismatch.
int hamming(const BitKey& a, const BitKey& b);

/// Every key at Hamming distance 1..radius from `key` (the key itself is
/// excluded), ordered by distance, then by flipped bit positions.
/// Size is sum_{d=1..radius} C(width, d).
std::vector<BitKey> hamming_ball(const BitKey& key, int radius);

/// Number of keys hamming_ball would return; throws if it exceeds the
/// enumeration limit.
std::int64_t hamming_ball_size(int width, int radius);

/// Encodes the neighborhood of `coord`; cells outside the grid read as 0.
BitKey encode_neighborhood(const VoxelGrid& grid, Coord coord, NeighborhoodSize size);

/// Voxels whose neighborhood holds at least one occupied voxel, in raster
/// order (z, then y, then x), with their keys.
struct ActiveSet {
    std::vector<Coord> coords;
    std::vector<BitKey> keys;
    std::size_t size() const { return coords.size(); }
};

ActiveSet active_voxels(const VoxelGrid& grid, NeighborhoodSize size);

/// Linear indices of the active voxels only (no keys), raster order.
std::vector<std::int64_t> active_indices(const VoxelGrid& grid, NeighborhoodSize size);

}  // namespace voxsynth

template <>
struct std::hash<voxsynth::BitKey> {
    std::size_t operator()(const voxsynth::BitKey& k) const noexcept {
        const auto& w = k.words();
        std::uint64_t h = w[0] * 0x9E3779B97F4A7C15ull;
        h ^= (w[1] + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2));
        return static_cast<std::size_t>(h ^ static_cast<std::uint64_t>(k.width()));
    }
};
