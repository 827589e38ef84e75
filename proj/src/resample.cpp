#include "voxsynth/resample.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "voxsynth/error.hpp"

namespace voxsynth {

namespace {

/// Dense float volume used as scratch for separable filtering.
struct Field {
    Dims dims;
    std::vector<float> v;

    explicit Field(Dims d) : dims(d), v(static_cast<std::size_t>(d.voxels()), 0.0f) {}
    std::int64_t stride(int axis) const {
        return axis == 0 ? 1 : axis == 1 ? dims.nx : dims.nx * dims.ny;
    }
    std::int64_t extent(int axis) const { return axis == 0 ? dims.nx : axis == 1 ? dims.ny : dims.nz; }
};

Field to_field(const VoxelGrid& g) {
    Field f(g.dims());
    g.for_each_set([&](std::int64_t i) { f.v[static_cast<std::size_t>(i)] = 1.0f; });
    return f;
}

VoxelGrid binarize(const Field& f, Spacing spacing) {
    VoxelGrid out(f.dims, spacing);
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        if (f.v[i] >= 0.5f) out.set(static_cast<std::int64_t>(i), true);
    }
    return out;
}

Dims with_extent(Dims d, int axis, std::int64_t n) {
    if (axis == 0) d.nx = n;
    if (axis == 1) d.ny = n;
    if (axis == 2) d.nz = n;
    return d;
}

/// Applies `line_fn(in_line, out_line)` to every 1D line along `axis`,
/// producing a field whose extent along `axis` is `out_n`.
template <typename LineFn>
Field map_lines(const Field& in, int axis, std::int64_t out_n, LineFn&& line_fn) {
    Field out(with_extent(in.dims, axis, out_n));
    const std::int64_t n = in.extent(axis);
    const std::int64_t in_stride = in.stride(axis);
    const std::int64_t out_stride = out.stride(axis);
    // Lines are enumerated by their base offset over the two remaining axes.
    const int a1 = axis == 0 ? 1 : 0;
    const int a2 = axis == 2 ? 1 : 2;
    std::vector<float> src(static_cast<std::size_t>(n));
    std::vector<float> dst(static_cast<std::size_t>(out_n));
    for (std::int64_t j2 = 0; j2 < in.extent(a2); ++j2) {
        for (std::int64_t j1 = 0; j1 < in.extent(a1); ++j1) {
            const std::int64_t in_base = j1 * in.stride(a1) + j2 * in.stride(a2);
            const std::int64_t out_base = j1 * out.stride(a1) + j2 * out.stride(a2);
            for (std::int64_t i = 0; i < n; ++i) src[i] = in.v[in_base + i * in_stride];
            line_fn(src, dst);
            for (std::int64_t i = 0; i < out_n; ++i) out.v[out_base + i * out_stride] = dst[i];
        }
    }
    return out;
}

/// Smooths with a normalized 3-tap Gaussian, then averages pairs.
void gaussian_halve(const std::vector<float>& src, std::vector<float>& dst, float w_side) {
    const auto n = static_cast<std::int64_t>(src.size());
    auto smooth = [&](std::int64_t i) {
        float acc = src[i];
        float wsum = 1.0f;
        if (i > 0) {
            acc += w_side * src[i - 1];
            wsum += w_side;
        }
        if (i + 1 < n) {
            acc += w_side * src[i + 1];
            wsum += w_side;
        }
        return acc / wsum;
    };
    for (std::size_t j = 0; j < dst.size(); ++j) {
        const auto i = static_cast<std::int64_t>(2 * j);
        dst[j] = 0.5f * (smooth(i) + smooth(i + 1));
    }
}

void mean_halve(const std::vector<float>& src, std::vector<float>& dst) {
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = 0.5f * (src[2 * j] + src[2 * j + 1]);
}

void nearest_line(const std::vector<float>& src, std::vector<float>& dst, int factor) {
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = src[j / static_cast<std::size_t>(factor)];
}

void linear_line(const std::vector<float>& src, std::vector<float>& dst, int factor) {
    const auto n = static_cast<std::int64_t>(src.size());
    for (std::size_t j = 0; j < dst.size(); ++j) {
        double p = (static_cast<double>(j) + 0.5) / factor - 0.5;
        p = std::clamp(p, 0.0, static_cast<double>(n - 1));
        const auto i0 = static_cast<std::int64_t>(std::floor(p));
        const std::int64_t i1 = std::min(i0 + 1, n - 1);
        const double t = p - static_cast<double>(i0);
        dst[j] = static_cast<float>((1.0 - t) * src[i0] + t * src[i1]);
    }
}

std::int64_t mirror_index(std::int64_t i, std::int64_t n) {
    if (n == 1) return 0;
    const std::int64_t period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

/// Cubic B-spline prefilter (whole-sample mirror boundary).
std::vector<double> spline_coefficients(const std::vector<float>& src) {
    const auto n = static_cast<std::int64_t>(src.size());
    std::vector<double> c(src.begin(), src.end());
    if (n == 1) return c;
    const double z = std::sqrt(3.0) - 2.0;
    const double gain = (1.0 - z) * (1.0 - 1.0 / z);
    for (auto& v : c) v *= gain;

    const auto horizon = std::min<std::int64_t>(n, 30);
    double zk = z;
    double sum = c[0];
    for (std::int64_t k = 1; k < horizon; ++k) {
        sum += zk * c[k];
        zk *= z;
    }
    c[0] = sum;
    for (std::int64_t k = 1; k < n; ++k) c[k] += z * c[k - 1];
    c[n - 1] = (z / (z * z - 1.0)) * (c[n - 1] + z * c[n - 2]);
    for (std::int64_t k = n - 2; k >= 0; --k) c[k] = z * (c[k + 1] - c[k]);
    return c;
}

void spline_line(const std::vector<float>& src, std::vector<float>& dst, int factor) {
    const auto n = static_cast<std::int64_t>(src.size());
    const auto c = spline_coefficients(src);
    for (std::size_t j = 0; j < dst.size(); ++j) {
        const double p = (static_cast<double>(j) + 0.5) / factor - 0.5;
        const auto base = static_cast<std::int64_t>(std::floor(p));
        const double t = p - static_cast<double>(base);
        // Cubic B-spline weights for samples base-1 .. base+2.
        const double w0 = (1.0 - t) * (1.0 - t) * (1.0 - t) / 6.0;
        const double w1 = (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0;
        const double w2 = (1.0 + 3.0 * t + 3.0 * t * t - 3.0 * t * t * t) / 6.0;
        const double w3 = t * t * t / 6.0;
        dst[j] = static_cast<float>(w0 * c[mirror_index(base - 1, n)] + w1 * c[mirror_index(base, n)] +
                                    w2 * c[mirror_index(base + 1, n)] + w3 * c[mirror_index(base + 2, n)]);
    }
}

std::int64_t round_up(std::int64_t v, std::int64_t m) { return (v + m - 1) / m * m; }

}  // namespace

VoxelGrid downsample2x(const VoxelGrid& grid, const DownsampleOptions& options) {
    const Dims& d = grid.dims();
    if (d.nx % 2 != 0 || d.ny % 2 != 0 || d.nz % 2 != 0) {
        throw ValidationError("downsample2x needs even dims, got " + std::to_string(d.nx) + "x" +
                              std::to_string(d.ny) + "x" + std::to_string(d.nz) + "; pad with pad_to_pow2 first");
    }
    if (options.smoothing == Smoothing::gaussian && !(options.sigma > 0.0)) {
        throw ValidationError("gaussian sigma must be > 0");
    }
    const float w_side = static_cast<float>(std::exp(-1.0 / (2.0 * options.sigma * options.sigma)));
    Field f = to_field(grid);
    for (int axis = 0; axis < 3; ++axis) {
        f = map_lines(f, axis, f.extent(axis) / 2, [&](const auto& src, auto& dst) {
            if (options.smoothing == Smoothing::gaussian) {
                gaussian_halve(src, dst, w_side);
            } else {
                mean_halve(src, dst);
            }
        });
    }
    const Spacing& s = grid.spacing();
    return binarize(f, Spacing{s.sx * 2, s.sy * 2, s.sz * 2});
}

VoxelGrid upsample_interp(const VoxelGrid& grid, int factor, InterpOrder order) {
    if (factor < 2 || (factor & (factor - 1)) != 0) {
        throw ValidationError("upsample factor must be a power of two >= 2, got " + std::to_string(factor));
    }
    Field f = to_field(grid);
    for (int axis = 0; axis < 3; ++axis) {
        f = map_lines(f, axis, f.extent(axis) * factor, [&](const auto& src, auto& dst) {
            switch (order) {
                case InterpOrder::nearest: nearest_line(src, dst, factor); break;
                case InterpOrder::trilinear: linear_line(src, dst, factor); break;
                case InterpOrder::cubic_spline: spline_line(src, dst, factor); break;
            }
        });
    }
    const Spacing& s = grid.spacing();
    return binarize(f, Spacing{s.sx / factor, s.sy / factor, s.sz / factor});
}

PaddedGrid pad_to_pow2(const VoxelGrid& grid, int levels) {
    if (levels < 1 || levels > 20) throw ValidationError("pad_to_pow2: levels must be in [1, 20]");
    const std::int64_t m = std::int64_t{1} << levels;
    const Dims& d = grid.dims();
    const Dims padded{round_up(d.nx, m), round_up(d.ny, m), round_up(d.nz, m)};
    if (padded == d) return PaddedGrid{grid, d};
    return PaddedGrid{crop(grid, Coord{0, 0, 0}, padded), d};
}

VoxelGrid crop_to(const VoxelGrid& grid, Dims dims) {
    if (dims == grid.dims()) return grid;
    return crop(grid, Coord{0, 0, 0}, dims);
}

}  // namespace voxsynth
