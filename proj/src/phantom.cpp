#include "voxsynth/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "voxsynth/error.hpp"

namespace voxsynth {

PhantomKind parse_phantom_kind(const std::string& s) {
    if (s == "sphere_shell" || s == "shell" || s == "sphere") return PhantomKind::sphere_shell;
    if (s == "staircase") return PhantomKind::staircase;
    if (s == "cube") return PhantomKind::cube;
    throw ValidationError("unknown phantom kind '" + s + "' (expected sphere_shell, staircase or cube)");
}

std::string to_string(PhantomKind k) {
    switch (k) {
        case PhantomKind::sphere_shell: return "sphere_shell";
        case PhantomKind::staircase: return "staircase";
        case PhantomKind::cube: return "cube";
    }
    return "?";
}

namespace {

VoxelGrid sphere_shell(Dims dims, const PhantomParams& p, std::uint64_t seed, Spacing spacing) {
    if (!(p.r_in >= 0.0) || !(p.r_out > 0.0) || p.r_in > p.r_out) {
        throw ValidationError("sphere_shell needs 0 <= r_in <= r_out and r_out > 0");
    }
    const double limit = (static_cast<double>(std::min({dims.nx, dims.ny, dims.nz})) - 1.0) / 2.0;
    if (p.r_out > limit) throw ValidationError("sphere_shell r_out exceeds the volume (max " + std::to_string(limit) + ")");
    if (!(p.perturb_rate >= 0.0 && p.perturb_rate <= 1.0)) throw ValidationError("perturb_rate must be in [0, 1]");

    VoxelGrid g(dims, spacing);
    const double cx = (static_cast<double>(dims.nx) - 1.0) / 2.0;
    const double cy = (static_cast<double>(dims.ny) - 1.0) / 2.0;
    const double cz = (static_cast<double>(dims.nz) - 1.0) / 2.0;
    const double in2 = p.r_in * p.r_in;
    const double out2 = p.r_out * p.r_out;
    for (std::int64_t z = 0; z < dims.nz; ++z) {
        for (std::int64_t y = 0; y < dims.ny; ++y) {
            for (std::int64_t x = 0; x < dims.nx; ++x) {
                const double dx = x - cx;
                const double dy = y - cy;
                const double dz = z - cz;
                const double r2 = dx * dx + dy * dy + dz * dz;
                if (r2 >= in2 && r2 <= out2) g.set(x, y, z, true);
            }
        }
    }
    if (p.perturb_rate == 0.0) return g;

    const VoxelGrid clean = g;
    std::mt19937_64 rng(seed);
    const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (std::int64_t z = 0; z < dims.nz; ++z) {
        for (std::int64_t y = 0; y < dims.ny; ++y) {
            for (std::int64_t x = 0; x < dims.nx; ++x) {
                const bool v = clean.get(x, y, z);
                bool band = false;
                for (const auto& o : off) {
                    if (clean.get_or_zero(x + o[0], y + o[1], z + o[2]) != v) band = true;
                }
                if (!band) continue;
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                if (u < p.perturb_rate) g.set(x, y, z, !v);
            }
        }
    }
    return g;
}

VoxelGrid staircase(Dims dims, const PhantomParams& p, Spacing spacing) {
    VoxelGrid g(dims, spacing);
    for (std::int64_t x = 0; x < dims.nx; ++x) {
        const std::int64_t h = p.alternating ? p.base + (x % 2 == 1 ? p.step : 0) : p.base + p.step * x;
        if (h < 0 || h >= dims.nz) throw ValidationError("staircase height " + std::to_string(h) + " outside [0, nz)");
        for (std::int64_t z = 0; z <= h; ++z) {
            for (std::int64_t y = 0; y < dims.ny; ++y) g.set(x, y, z, true);
        }
    }
    return g;
}

VoxelGrid cube(Dims dims, const PhantomParams& p, Spacing spacing) {
    if (p.side <= 0 || p.side > std::min({dims.nx, dims.ny, dims.nz})) {
        throw ValidationError("cube side must be in [1, min(dims)]");
    }
    VoxelGrid g(dims, spacing);
    const std::int64_t ox = (dims.nx - p.side) / 2;
    const std::int64_t oy = (dims.ny - p.side) / 2;
    const std::int64_t oz = (dims.nz - p.side) / 2;
    for (std::int64_t z = 0; z < p.side; ++z) {
        for (std::int64_t y = 0; y < p.side; ++y) {
            for (std::int64_t x = 0; x < p.side; ++x) g.set(ox + x, oy + y, oz + z, true);
        }
    }
    return g;
}

}  // namespace

PhantomParams standard_shell(std::int64_t n) {
    PhantomParams p;
    p.r_in = 15.0 * static_cast<double>(n) / 64.0;
    p.r_out = 30.0 * static_cast<double>(n) / 64.0;
    return p;
}

VoxelGrid make_phantom(PhantomKind kind, Dims dims, const PhantomParams& params, std::uint64_t seed, Spacing spacing) {
    switch (kind) {
        case PhantomKind::sphere_shell: return sphere_shell(dims, params, seed, spacing);
        case PhantomKind::staircase: return staircase(dims, params, spacing);
        case PhantomKind::cube: return cube(dims, params, spacing);
    }
    throw ValidationError("unknown phantom kind");
}

}  // namespace voxsynth
