#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "voxsynth/hash_index.hpp"
#include "voxsynth/synthesis_config.hpp"
#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

/// Per-level counters for one synthesis pass.
struct LevelStats {
    int level = 0;
    Dims dims;
    std::size_t keys_actual = 0;
    std::size_t keys_neighbor = 0;
    std::int64_t queries = 0;
    std::int64_t hits_actual = 0;
    std::int64_t hits_neighbor = 0;
    std::int64_t fallbacks = 0;
    std::size_t bytes_index = 0;
    std::size_t bytes_keys = 0;  ///< bit-packed actual keys
    int max_probes = 0;
    double seconds_index = 0.0;
    double seconds_synthesis = 0.0;

    /// Fraction of queries resolved by either table; 1 when there were none.
    double hit_rate() const {
        return queries == 0 ? 1.0 : static_cast<double>(hits_actual + hits_neighbor) / static_cast<double>(queries);
    }
    void absorb(const LevelStats& other);
};

/// One double-buffered replacement pass. Every active voxel of `coarse_up`
/// is looked up by its neighborhood key; a match copies the template's
/// occupancy at the smallest matched coordinate, a miss takes the fallback
/// bit. Non-active voxels are copied through.
///
/// Uses cfg.parallel for serial or shared-index execution; partitioned mode
/// needs per-part indices and goes through the overload below.
VoxelGrid synthesize_level(const VoxelGrid& coarse_up, const VoxelGrid& template_level, const HashIndex& index,
                           const SynthesisConfig& cfg, LevelStats* stats = nullptr);

/// Builds whatever indices cfg.parallel calls for, then synthesizes.
VoxelGrid synthesize_level(const VoxelGrid& coarse_up, const VoxelGrid& template_level, const SynthesisConfig& cfg,
                           LevelStats* stats = nullptr);

/// A read window of a grid: the core it owns plus a halo of read-only context.
struct Part {
    VoxelGrid sub;
    Coord read_offset;
    Coord core_offset;
    Dims core_dims;
};

/// Splits into 1, 2, 4 or 8 cores by halving x, then y, then z. Each part
/// carries `halo` extra voxels on every side that stays inside the volume.
std::vector<Part> partition(const VoxelGrid& grid, int parts, int halo);

/// Copies the core region of `part_result` (laid out like part.sub) into `dst`.
void write_core(VoxelGrid& dst, const Part& part, const VoxelGrid& part_result);

/// levels[0] is the coarsest; levels.back() is the full-resolution input.
struct Pyramid {
    std::vector<VoxelGrid> levels;
};
Pyramid build_pyramid(const VoxelGrid& full, int levels, const DownsampleOptions& options);

struct HierarchyResult {
    VoxelGrid output;
    std::vector<LevelStats> levels;
};

struct HierarchyHooks {
    /// Called with the upsampled guess for each level before matching; may
    /// replace it.
    std::function<void(int level, VoxelGrid& guess)> on_level_guess;
};

/// Refines `coarse` level by level against the template pyramid: upsample
/// the previous result by 2, then run synthesize_level against the template
/// level of the same size with a freshly built index.
HierarchyResult synthesize_hierarchical(const VoxelGrid& coarse, const VoxelGrid& template_full,
                                        const SynthesisConfig& cfg, const HierarchyHooks& hooks = {});

}  // namespace voxsynth
