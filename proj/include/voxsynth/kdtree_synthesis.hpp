#pragma once

#include <cstddef>
#include <vector>

#include "voxsynth/kdtree.hpp"
#include "voxsynth/pca.hpp"
#include "voxsynth/synthesis_config.hpp"
#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

/// Exact-NNS baseline: template neighborhoods projected by PCA and stored in
/// a kd-tree. Identical keys share one tree point whose coordinate is the
/// smallest template coordinate carrying that key, so tree index order and
/// coordinate order agree on ties.
struct KdTreeIndex {
    PcaModel model;
    KdTree tree;
    std::vector<Coord> coords;  ///< per tree point
    std::vector<BitKey> keys;   ///< per tree point
    NeighborhoodSize nbhd = NeighborhoodSize::three;
    Dims source_dims;
    std::size_t active_count = 0;

    /// An active_count x d float feature matrix, the footprint of storing
    /// one projected feature per template voxel.
    std::size_t bytes_features() const { return active_count * static_cast<std::size_t>(model.dims()) * sizeof(float); }
};

struct KdTreeStats {
    Dims dims;
    int d = 0;
    std::size_t points = 0;
    std::size_t active_count = 0;
    std::int64_t queries = 0;
    std::int64_t exact_hits = 0;  ///< queries whose projected distance was 0
    std::size_t bytes_features = 0;
    std::size_t bytes_tree = 0;
    double seconds_index = 0.0;
    double seconds_synthesis = 0.0;
};

/// Fits PCA on all active template features and builds the tree. Throws if
/// the template has fewer active voxels than d or no variance.
KdTreeIndex build_kdtree_index(const VoxelGrid& template_level, NeighborhoodSize nbhd, int d);

/// Same contract as synthesize_level, but each active voxel copies the
/// template center bit of its exact nearest neighbor in projected space.
/// There is no fallback branch. Shared-index parallelism is honored;
/// partitioned mode runs as shared.
VoxelGrid synthesize_level_kdtree(const VoxelGrid& coarse_up, const VoxelGrid& template_level,
                                  const KdTreeIndex& index, const SynthesisConfig& cfg, KdTreeStats* stats = nullptr);

struct KdTreeHierarchyResult {
    VoxelGrid output;
    std::vector<KdTreeStats> levels;
};

KdTreeHierarchyResult synthesize_hierarchical_kdtree(const VoxelGrid& coarse, const VoxelGrid& template_full,
                                                     const SynthesisConfig& cfg, int d);

}  // namespace voxsynth
