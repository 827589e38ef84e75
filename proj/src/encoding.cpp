#include "voxsynth/encoding.hpp"

#include <string>

#include "voxsynth/error.hpp"
#include "voxsynth/morphology.hpp"

namespace voxsynth {

namespace {

constexpr std::int64_t kMaxBallSize = std::int64_t{50'000'000};

std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<std::int64_t>(r + 0.5L);
}

void check_width(int width) {
    if (width < 1 || width > BitKey::kMaxWidth) {
        throw ValidationError("bit key width must be in [1, 128], got " + std::to_string(width));
    }
}

/// Recursively flips `remaining` more bits at positions >= `first`.
void enumerate_flips(BitKey& cur, int first, int remaining, std::vector<BitKey>& out) {
    if (remaining == 0) {
        out.push_back(cur);
        return;
    }
    for (int i = first; i <= cur.width() - remaining; ++i) {
        cur.flip(i);
        enumerate_flips(cur, i + 1, remaining - 1, out);
        cur.flip(i);
    }
}

}  // namespace

NeighborhoodSize neighborhood_from_int(int size) {
    if (size == 3) return NeighborhoodSize::three;
    if (size == 5) return NeighborhoodSize::five;
    throw ValidationError("neighborhood size must be 3 or 5, got " + std::to_string(size));
}

BitKey::BitKey(int width) : width_(width) { check_width(width); }

BitKey BitKey::from_words(int width, std::uint64_t lo, std::uint64_t hi) {
    BitKey k(width);
    k.words_ = {lo, hi};
    if (width < 64) {
        k.words_[0] &= (std::uint64_t{1} << width) - 1;
        k.words_[1] = 0;
    } else if (width < 128) {
        k.words_[1] &= (std::uint64_t{1} << (width - 64)) - 1;
    }
    return k;
}

BitKey BitKey::all_ones(int width) { return from_words(width, ~std::uint64_t{0}, ~std::uint64_t{0}); }

BitKey BitKey::complement() const { return from_words(width_, ~words_[0], ~words_[1]); }

int hamming(const BitKey& a, const BitKey& b) {
    if (a.width() != b.width()) {
        throw ValidationError("hamming: width mismatch (" + std::to_string(a.width()) + " vs " +
                              std::to_string(b.width()) + ")");
    }
    return std::popcount(a.words()[0] ^ b.words()[0]) + std::popcount(a.words()[1] ^ b.words()[1]);
}

std::int64_t hamming_ball_size(int width, int radius) {
    if (radius < 0 || radius > width) {
        throw ValidationError("hamming ball radius must be in [0, width], got " + std::to_string(radius));
    }
    std::int64_t total = 0;
    for (int d = 1; d <= radius; ++d) {
        total += binomial(width, d);
        if (total > kMaxBallSize) {
            throw ValidationError("hamming ball of radius " + std::to_string(radius) + " over " +
                                  std::to_string(width) + " bits exceeds the enumeration limit");
        }
    }
    return total;
}

std::vector<BitKey> hamming_ball(const BitKey& key, int radius) {
    std::vector<BitKey> out;
    out.reserve(static_cast<std::size_t>(hamming_ball_size(key.width(), radius)));
    BitKey cur = key;
    for (int d = 1; d <= radius; ++d) enumerate_flips(cur, 0, d, out);
    return out;
}

BitKey encode_neighborhood(const VoxelGrid& grid, Coord c, NeighborhoodSize size) {
    if (!grid.contains(c.x, c.y, c.z)) {
        throw ValidationError("encode_neighborhood: coord (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                              "," + std::to_string(c.z) + ") outside grid");
    }
    const int r = neighborhood_radius(size);
    BitKey key(key_width(size));
    int bit = 0;
    for (int dz = -r; dz <= r; ++dz) {
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx, ++bit) {
                if (grid.get_or_zero(c.x + dx, c.y + dy, c.z + dz)) key.set(bit);
            }
        }
    }
    return key;
}

std::vector<std::int64_t> active_indices(const VoxelGrid& grid, NeighborhoodSize size) {
    std::vector<std::int64_t> out;
    if (grid.empty()) return out;
    const VoxelGrid reach = dilate(grid, neighborhood_radius(size));
    out.reserve(static_cast<std::size_t>(reach.count()));
    reach.for_each_set([&](std::int64_t i) { out.push_back(i); });
    return out;
}

ActiveSet active_voxels(const VoxelGrid& grid, NeighborhoodSize size) {
    ActiveSet set;
    const auto indices = active_indices(grid, size);
    set.coords.reserve(indices.size());
    set.keys.reserve(indices.size());
    for (const auto i : indices) {
        const Coord c = grid.coord_of(i);
        set.coords.push_back(c);
        set.keys.push_back(encode_neighborhood(grid, c, size));
    }
    return set;
}

}  // namespace voxsynth
