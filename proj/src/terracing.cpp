#include "voxsynth/terracing.hpp"

#include <cstdlib>
#include <limits>
#include <optional>
#include <vector>

namespace voxsynth {

std::int64_t StepHistogram::total() const {
    std::int64_t n = 0;
    for (const auto& axis : counts) {
        for (const auto& [step, c] : axis) n += c;
    }
    return n;
}

double StepHistogram::mean_step() const {
    std::int64_t n = 0;
    std::int64_t weighted = 0;
    for (const auto& axis : counts) {
        for (const auto& [step, c] : axis) {
            n += c;
            weighted += static_cast<std::int64_t>(step) * c;
        }
    }
    return n == 0 ? 0.0 : static_cast<double>(weighted) / static_cast<double>(n);
}

std::map<int, std::int64_t> StepHistogram::combined() const {
    std::map<int, std::int64_t> out;
    for (const auto& axis : counts) {
        for (const auto& [step, c] : axis) out[step] += c;
    }
    return out;
}

namespace {

constexpr std::int64_t kNoSurface = std::numeric_limits<std::int64_t>::min();

/// Accumulates steps and flips along one row of column heights.
void scan_row(const std::vector<std::int64_t>& heights, std::map<int, std::int64_t>& counts, std::int64_t& flips) {
    int last_sign = 0;
    for (std::size_t i = 0; i + 1 < heights.size(); ++i) {
        if (heights[i] == kNoSurface || heights[i + 1] == kNoSurface) {
            last_sign = 0;
            continue;
        }
        const std::int64_t delta = heights[i + 1] - heights[i];
        if (delta == 0) continue;
        ++counts[static_cast<int>(std::llabs(delta))];
        const int sign = delta > 0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) ++flips;
        last_sign = sign;
    }
}

}  // namespace

StepHistogram terracing_stats(const VoxelGrid& grid) {
    StepHistogram hist;
    const Dims& d = grid.dims();
    const std::int64_t ext[3] = {d.nx, d.ny, d.nz};
    auto at = [&](int axis, std::int64_t h, int u_axis, std::int64_t u, int v_axis, std::int64_t v) {
        std::int64_t c[3];
        c[axis] = h;
        c[u_axis] = u;
        c[v_axis] = v;
        return grid.get(c[0], c[1], c[2]);
    };
    for (int axis = 0; axis < 3; ++axis) {
        const int u_axis = axis == 0 ? 1 : 0;
        const int v_axis = axis == 2 ? 1 : 2;
        const std::int64_t n = ext[axis];
        const std::int64_t nu = ext[u_axis];
        const std::int64_t nv = ext[v_axis];
        for (int dir : {+1, -1}) {
            // heights[v][u]; outward direction is positive in both cases.
            std::vector<std::vector<std::int64_t>> heights(static_cast<std::size_t>(nv),
                                                           std::vector<std::int64_t>(static_cast<std::size_t>(nu), kNoSurface));
            for (std::int64_t v = 0; v < nv; ++v) {
                for (std::int64_t u = 0; u < nu; ++u) {
                    std::optional<std::int64_t> outer;
                    if (dir > 0) {
                        for (std::int64_t h = n - 1; h >= 0 && !outer; --h) {
                            if (at(axis, h, u_axis, u, v_axis, v)) outer = h;
                        }
                        if (outer && *outer < n - 1) heights[v][u] = *outer;
                    } else {
                        for (std::int64_t h = 0; h < n && !outer; ++h) {
                            if (at(axis, h, u_axis, u, v_axis, v)) outer = h;
                        }
                        if (outer && *outer > 0) heights[v][u] = -*outer;
                    }
                }
            }
            for (std::int64_t v = 0; v < nv; ++v) scan_row(heights[v], hist.counts[axis], hist.derivative_sign_flips);
            std::vector<std::int64_t> column(static_cast<std::size_t>(nv));
            for (std::int64_t u = 0; u < nu; ++u) {
                for (std::int64_t v = 0; v < nv; ++v) column[v] = heights[v][u];
                scan_row(column, hist.counts[axis], hist.derivative_sign_flips);
            }
        }
    }
    return hist;
}

}  // namespace voxsynth
