#include "voxsynth/morphology.hpp"

#include <algorithm>
#include <string>

#include "voxsynth/error.hpp"

namespace voxsynth {

VoxelGrid subtract(const VoxelGrid& complete, const VoxelGrid& defective) {
    if (complete.dims() != defective.dims()) throw ValidationError("subtract: dims mismatch");
    if (complete.spacing() != defective.spacing()) throw ValidationError("subtract: spacing mismatch");
    VoxelGrid out = complete;
    auto dst = out.mutable_words();
    const auto src = defective.words();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] &= ~src[i];
    return out;
}

ComponentLabels label_components(const VoxelGrid& grid) {
    const Dims& d = grid.dims();
    ComponentLabels result;
    result.labels.assign(static_cast<std::size_t>(grid.size()), 0);
    result.sizes.push_back(0);
    std::vector<std::int64_t> stack;
    grid.for_each_set([&](std::int64_t seed) {
        if (result.labels[seed] != 0) return;
        const auto label = static_cast<std::int32_t>(result.sizes.size());
        std::int64_t size = 0;
        result.labels[seed] = label;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::int64_t i = stack.back();
            stack.pop_back();
            ++size;
            const Coord c = grid.coord_of(i);
            for (int dz = -1; dz <= 1; ++dz) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const std::int64_t x = c.x + dx;
                        const std::int64_t y = c.y + dy;
                        const std::int64_t z = c.z + dz;
                        if (!grid.contains(x, y, z)) continue;
                        const std::int64_t j = x + d.nx * (y + d.ny * z);
                        if (result.labels[j] == 0 && grid.get(j)) {
                            result.labels[j] = label;
                            stack.push_back(j);
                        }
                    }
                }
            }
        }
        result.sizes.push_back(size);
    });
    return result;
}

namespace {

/// Separable box min/max filter along each axis; `is_dilate` selects OR vs AND.
VoxelGrid box_filter(const VoxelGrid& grid, int radius, bool is_dilate) {
    if (radius < 0) throw ValidationError("morphology radius must be >= 0");
    if (radius == 0) return grid;
    const Dims& d = grid.dims();
    std::vector<std::uint8_t> cur(static_cast<std::size_t>(grid.size()), 0);
    grid.for_each_set([&](std::int64_t i) { cur[i] = 1; });
    std::vector<std::uint8_t> next(cur.size());
    const std::int64_t extents[3] = {d.nx, d.ny, d.nz};
    const std::int64_t strides[3] = {1, d.nx, d.nx * d.ny};
    std::vector<std::int64_t> prefix;
    for (int axis = 0; axis < 3; ++axis) {
        const std::int64_t n = extents[axis];
        const std::int64_t s = strides[axis];
        prefix.assign(static_cast<std::size_t>(n + 1), 0);
        for (std::int64_t base = 0; base < grid.size(); ++base) {
            // A line starts wherever the axis coordinate is zero.
            if ((base / s) % n != 0) continue;
            for (std::int64_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + cur[base + i * s];
            for (std::int64_t i = 0; i < n; ++i) {
                const std::int64_t lo = i - radius;
                const std::int64_t hi = i + radius;
                const std::int64_t sum = prefix[std::min(hi, n - 1) + 1] - prefix[std::max<std::int64_t>(lo, 0)];
                bool v;
                if (is_dilate) {
                    v = sum > 0;
                } else {
                    v = lo >= 0 && hi < n && sum == 2 * radius + 1;
                }
                next[base + i * s] = v ? 1 : 0;
            }
        }
        std::swap(cur, next);
    }
    VoxelGrid out(d, grid.spacing());
    for (std::size_t i = 0; i < cur.size(); ++i) {
        if (cur[i]) out.set(static_cast<std::int64_t>(i), true);
    }
    return out;
}

}  // namespace

VoxelGrid erode(const VoxelGrid& grid, int radius) { return box_filter(grid, radius, false); }
VoxelGrid dilate(const VoxelGrid& grid, int radius) { return box_filter(grid, radius, true); }

VoxelGrid denoise(const VoxelGrid& grid, KeepPolicy keep, int morph_radius) {
    if (morph_radius < 0) throw ValidationError("denoise: morph_radius must be >= 0");
    const ComponentLabels cc = label_components(grid);
    std::vector<char> keep_label(cc.sizes.size(), 0);
    if (keep.mode == KeepPolicy::Mode::largest_component) {
        // First label wins ties, which is the one with the lowest raster-order seed.
        std::int32_t best = 0;
        for (std::int32_t l = 1; l <= cc.count(); ++l) {
            if (best == 0 || cc.sizes[l] > cc.sizes[best]) best = l;
        }
        if (best != 0) keep_label[best] = 1;
    } else {
        for (std::int32_t l = 1; l <= cc.count(); ++l) keep_label[l] = cc.sizes[l] >= keep.min_size;
    }
    VoxelGrid kept(grid.dims(), grid.spacing());
    grid.for_each_set([&](std::int64_t i) {
        if (keep_label[cc.labels[i]]) kept.set(i, true);
    });
    if (morph_radius == 0) return kept;
    return dilate(erode(kept, morph_radius), morph_radius);
}

}  // namespace voxsynth
