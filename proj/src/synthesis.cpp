#include "voxsynth/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "voxsynth/error.hpp"
#include "voxsynth/parallel.hpp"
#include "voxsynth/resample.hpp"

namespace voxsynth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_level_inputs(const VoxelGrid& coarse_up, const VoxelGrid& template_level, const HashIndex& index,
                        const SynthesisConfig& cfg) {
    if (coarse_up.dims() != template_level.dims()) throw ValidationError("synthesize_level: dims mismatch");
    if (index.width() != key_width(cfg.nbhd)) throw ValidationError("synthesize_level: index width mismatch");
    if (index.source_dims() != template_level.dims()) {
        throw ValidationError("synthesize_level: index was built for a different template level");
    }
}

/// Maps a voxel of a (sub)volume to its index in the global volume, so
/// fallback draws do not depend on how the volume was split.
struct GlobalFrame {
    Coord offset;
    Dims dims;
    std::int64_t operator()(const Coord& c) const {
        return (c.x + offset.x) + dims.nx * ((c.y + offset.y) + dims.ny * (c.z + offset.z));
    }
};

/// Processes queries[begin, end) and writes into `out`.
void synthesize_queries(const VoxelGrid& coarse_up, const VoxelGrid& template_level, const HashIndex& index,
                        const SynthesisConfig& cfg, const std::vector<std::int64_t>& queries, std::size_t begin,
                        std::size_t end, const GlobalFrame& frame, VoxelGrid& out, LevelStats& stats) {
    for (std::size_t q = begin; q < end; ++q) {
        const std::int64_t i = queries[q];
        const Coord c = coarse_up.coord_of(i);
        const BitKey key = encode_neighborhood(coarse_up, c, cfg.nbhd);
        const FirstMatch m = index.find_first(key);
        stats.max_probes = std::max(stats.max_probes, m.probes);
        bool value = false;
        switch (m.source) {
            case MatchSource::actual:
                ++stats.hits_actual;
                value = template_level.get(m.coord);
                break;
            case MatchSource::neighbor:
                ++stats.hits_neighbor;
                value = template_level.get(m.coord);
                break;
            case MatchSource::fallback:
                ++stats.fallbacks;
                switch (cfg.fallback) {
                    case FallbackPolicy::random: value = fallback_coin(cfg.seed, frame(c)); break;
                    case FallbackPolicy::keep_coarse: value = key.center(); break;
                    case FallbackPolicy::majority: value = key.popcount() * 2 > key.width(); break;
                }
                break;
        }
        out.set(i, value);
    }
    stats.queries += static_cast<std::int64_t>(end - begin);
}

/// Serial or shared-index pass over a whole (sub)volume.
VoxelGrid run_level(const VoxelGrid& coarse_up, const VoxelGrid& template_level, const HashIndex& index,
                    const SynthesisConfig& cfg, int workers, const GlobalFrame& frame, LevelStats& stats) {
    const auto queries = active_indices(coarse_up, cfg.nbhd);
    VoxelGrid out = coarse_up;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(queries.size() / 1024) + 1));
    // Chunk boundaries never split a 64-bit word, so workers write disjoint words.
    std::vector<std::size_t> bounds{0};
    for (int w = 1; w < workers; ++w) {
        std::size_t b = queries.size() * static_cast<std::size_t>(w) / static_cast<std::size_t>(workers);
        b = std::max(b, bounds.back());
        while (b > 0 && b < queries.size() && (queries[b] >> 6) == (queries[b - 1] >> 6)) ++b;
        bounds.push_back(b);
    }
    bounds.push_back(queries.size());
    std::vector<LevelStats> partial(static_cast<std::size_t>(workers));
    parallel_for(workers, workers, [&](int w) {
        synthesize_queries(coarse_up, template_level, index, cfg, queries, bounds[w], bounds[w + 1], frame, out,
                           partial[w]);
    });
    for (const auto& p : partial) stats.absorb(p);
    return out;
}

void record_index(LevelStats& stats, const HashIndex& index) {
    stats.keys_actual += index.actual_key_count();
    stats.keys_neighbor += index.neighbor_key_count();
    stats.bytes_index += index.bytes_total();
    stats.bytes_keys += index.bytes_actual_keys();
}

}  // namespace

void LevelStats::absorb(const LevelStats& o) {
    queries += o.queries;
    hits_actual += o.hits_actual;
    hits_neighbor += o.hits_neighbor;
    fallbacks += o.fallbacks;
    max_probes = std::max(max_probes, o.max_probes);
}

VoxelGrid synthesize_level(const VoxelGrid& coarse_up, const VoxelGrid& template_level, const HashIndex& index,
                           const SynthesisConfig& cfg, LevelStats* stats) {
    cfg.validate();
    check_level_inputs(coarse_up, template_level, index, cfg);
    if (cfg.parallel.kind == ParallelMode::Kind::partitioned_index) {
        throw ValidationError("partitioned mode builds one index per part; call synthesize_level without an index");
    }
    const auto t0 = Clock::now();
    LevelStats local;
    local.dims = coarse_up.dims();
    const int workers = cfg.parallel.kind == ParallelMode::Kind::serial ? 1 : cfg.parallel.workers;
    VoxelGrid out = run_level(coarse_up, template_level, index, cfg, workers,
                              GlobalFrame{Coord{}, coarse_up.dims()}, local);
    local.seconds_synthesis = seconds_since(t0);
    if (stats != nullptr) {
        local.level = stats->level;
        record_index(local, index);
        local.seconds_index = stats->seconds_index;
        *stats = local;
    }
    return out;
}

VoxelGrid synthesize_level(const VoxelGrid& coarse_up, const VoxelGrid& template_level, const SynthesisConfig& cfg,
                           LevelStats* stats) {
    cfg.validate();
    if (coarse_up.dims() != template_level.dims()) throw ValidationError("synthesize_level: dims mismatch");
    LevelStats local;
    local.level = stats != nullptr ? stats->level : 0;
    local.dims = coarse_up.dims();
    VoxelGrid out = coarse_up;

    if (cfg.parallel.kind != ParallelMode::Kind::partitioned_index) {
        const auto t0 = Clock::now();
        const HashIndex index = HashIndex::build(template_level, cfg);
        const double build_seconds = seconds_since(t0);
        out = synthesize_level(coarse_up, template_level, index, cfg, &local);
        local.seconds_index = build_seconds;
    } else {
        const int halo = neighborhood_radius(cfg.nbhd);
        const auto coarse_parts = partition(coarse_up, cfg.parallel.workers, halo);
        const auto template_parts = partition(template_level, cfg.parallel.workers, halo);
        const int n = static_cast<int>(coarse_parts.size());
        std::vector<VoxelGrid> results(coarse_parts.size());
        std::vector<LevelStats> partial(coarse_parts.size());
        std::vector<HashIndex> indices(coarse_parts.size());
        const auto t0 = Clock::now();
        parallel_for(cfg.parallel.workers, n, [&](int p) {
            indices[p] = HashIndex::build(template_parts[p].sub, cfg);
        });
        local.seconds_index = seconds_since(t0);
        const auto t1 = Clock::now();
        parallel_for(cfg.parallel.workers, n, [&](int p) {
            results[p] = run_level(coarse_parts[p].sub, template_parts[p].sub, indices[p], cfg, 1,
                                   GlobalFrame{coarse_parts[p].read_offset, coarse_up.dims()}, partial[p]);
        });
        for (int p = 0; p < n; ++p) {
            write_core(out, coarse_parts[p], results[p]);
            local.absorb(partial[p]);
            record_index(local, indices[p]);
        }
        local.seconds_synthesis = seconds_since(t1);
    }
    if (stats != nullptr) *stats = local;
    return out;
}

std::vector<Part> partition(const VoxelGrid& grid, int parts, int halo) {
    if (parts != 1 && parts != 2 && parts != 4 && parts != 8) {
        throw ValidationError("partition supports 1, 2, 4 or 8 parts, got " + std::to_string(parts));
    }
    if (halo < 0) throw ValidationError("partition halo must be >= 0");
    const Dims& d = grid.dims();
    const int splits = parts == 1 ? 0 : parts == 2 ? 1 : parts == 4 ? 2 : 3;
    const std::int64_t extents[3] = {d.nx, d.ny, d.nz};
    // Per-axis core intervals.
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges[3];
    for (int axis = 0; axis < 3; ++axis) {
        const std::int64_t n = extents[axis];
        if (axis < splits) {
            const std::int64_t mid = n / 2;
            ranges[axis] = {{0, mid}, {mid, n}};
            if (mid < 2 * halo || n - mid < 2 * halo || mid == 0) {
                throw ValidationError("partition: subvolume extent " + std::to_string(mid) +
                                      " is smaller than twice the halo (" + std::to_string(halo) + ")");
            }
        } else {
            ranges[axis] = {{0, n}};
        }
    }
    std::vector<Part> out;
    for (const auto& [z0, z1] : ranges[2]) {
        for (const auto& [y0, y1] : ranges[1]) {
            for (const auto& [x0, x1] : ranges[0]) {
                const std::int64_t rx0 = std::max<std::int64_t>(0, x0 - halo);
                const std::int64_t ry0 = std::max<std::int64_t>(0, y0 - halo);
                const std::int64_t rz0 = std::max<std::int64_t>(0, z0 - halo);
                const std::int64_t rx1 = std::min(d.nx, x1 + halo);
                const std::int64_t ry1 = std::min(d.ny, y1 + halo);
                const std::int64_t rz1 = std::min(d.nz, z1 + halo);
                Part p;
                p.read_offset = Coord{static_cast<std::int32_t>(rx0), static_cast<std::int32_t>(ry0),
                                      static_cast<std::int32_t>(rz0)};
                p.core_offset = Coord{static_cast<std::int32_t>(x0), static_cast<std::int32_t>(y0),
                                      static_cast<std::int32_t>(z0)};
                p.core_dims = Dims{x1 - x0, y1 - y0, z1 - z0};
                p.sub = crop(grid, p.read_offset, Dims{rx1 - rx0, ry1 - ry0, rz1 - rz0});
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

void write_core(VoxelGrid& dst, const Part& part, const VoxelGrid& result) {
    if (result.dims() != part.sub.dims()) throw ValidationError("write_core: result dims do not match the part");
    const Coord rel{part.core_offset.x - part.read_offset.x, part.core_offset.y - part.read_offset.y,
                    part.core_offset.z - part.read_offset.z};
    for (std::int64_t z = 0; z < part.core_dims.nz; ++z) {
        for (std::int64_t y = 0; y < part.core_dims.ny; ++y) {
            for (std::int64_t x = 0; x < part.core_dims.nx; ++x) {
                dst.set(x + part.core_offset.x, y + part.core_offset.y, z + part.core_offset.z,
                        result.get(x + rel.x, y + rel.y, z + rel.z));
            }
        }
    }
}

Pyramid build_pyramid(const VoxelGrid& full, int levels, const DownsampleOptions& options) {
    if (levels < 0) throw ValidationError("pyramid levels must be >= 0");
    Pyramid p;
    p.levels.resize(static_cast<std::size_t>(levels) + 1);
    p.levels.back() = full;
    for (int l = levels - 1; l >= 0; --l) p.levels[l] = downsample2x(p.levels[l + 1], options);
    return p;
}

HierarchyResult synthesize_hierarchical(const VoxelGrid& coarse, const VoxelGrid& template_full,
                                        const SynthesisConfig& cfg, const HierarchyHooks& hooks) {
    cfg.validate();
    const std::int64_t scale = std::int64_t{1} << cfg.levels;
    const Dims& c = coarse.dims();
    const Dims& t = template_full.dims();
    if (t.nx != c.nx * scale || t.ny != c.ny * scale || t.nz != c.nz * scale) {
        throw ValidationError("template dims must equal coarse dims x 2^levels (" + std::to_string(scale) +
                              "); pad the template with pad_to_pow2 first");
    }
    const Pyramid pyramid = build_pyramid(template_full, cfg.levels, cfg.pyramid);
    HierarchyResult result;
    VoxelGrid current = coarse;
    for (int level = 1; level <= cfg.levels; ++level) {
        VoxelGrid guess = upsample_interp(current, 2, cfg.level_upsample);
        guess.set_spacing(pyramid.levels[level].spacing());
        if (hooks.on_level_guess) hooks.on_level_guess(level, guess);
        LevelStats stats;
        stats.level = level;
        current = synthesize_level(guess, pyramid.levels[level], cfg, &stats);
        result.levels.push_back(stats);
    }
    result.output = std::move(current);
    return result;
}

}  // namespace voxsynth
