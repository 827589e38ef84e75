#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "voxsynth/encoding.hpp"
#include "voxsynth/synthesis_config.hpp"
#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

enum class MatchSource { actual, neighbor, fallback };

const char* to_string(MatchSource s);

struct MatchResult {
    MatchSource source = MatchSource::fallback;
    std::vector<Coord> coords;    ///< sorted; empty for fallback
    bool assigned_value = false;  ///< meaningful for fallback only
};

/// Hot-path match: only the tie-break winner (smallest coordinate).
struct FirstMatch {
    MatchSource source = MatchSource::fallback;
    Coord coord;
    int probes = 0;  ///< hash-map probes spent on this query
};

/// Hash-table index over the neighborhood keys of one template level.
///
/// Two tables, consulted in this order:
///  - actual keys: every distinct key of an active template voxel, mapped to
///    all template coordinates carrying it;
///  - neighbor keys: every key within Hamming distance 1..radius of some
///    actual key, mapped to the union of those actual keys' coordinates.
/// Neighbor entries store the ids of their source actual keys; their
/// coordinate union is materialized on demand and the smallest coordinate
/// is precomputed. Keys occupy ceil(width / 64) words in the tables.
///
/// The index is immutable after build and cheap to copy (shared state).
class HashIndex {
public:
    static HashIndex build(const VoxelGrid& template_level, NeighborhoodSize nbhd, int radius);
    static HashIndex build(const VoxelGrid& template_level, const SynthesisConfig& cfg) {
        return build(template_level, cfg.nbhd, cfg.radius);
    }

    int width() const;
    int radius() const;
    NeighborhoodSize nbhd() const;
    const Dims& source_dims() const;

    std::size_t actual_key_count() const;
    std::size_t neighbor_key_count() const;

    /// Branch order: actual table, then neighbor table, then the fallback
    /// policy. The random fallback draws fallback_coin(seed, voxel_index);
    /// keep_coarse returns the key's center bit.
    MatchResult lookup(const BitKey& key, FallbackPolicy fallback, std::uint64_t seed,
                       std::int64_t voxel_index) const;
    MatchResult lookup(const BitKey& key, const SynthesisConfig& cfg, std::int64_t voxel_index) const {
        return lookup(key, cfg.fallback, cfg.seed, voxel_index);
    }

    FirstMatch find_first(const BitKey& key) const;

    /// Empty span when `key` is not an actual key.
    std::span<const Coord> actual_coords(const BitKey& key) const;
    bool has_neighbor(const BitKey& key) const;
    /// Union of the source actual keys' coordinates, sorted; empty when absent.
    std::vector<Coord> neighbor_coords(const BitKey& key) const;

    /// Actual keys in first-seen raster order.
    std::vector<BitKey> actual_keys() const;
    /// Visits every neighbor key with the actual keys it was generated from.
    void for_each_neighbor(const std::function<void(const BitKey&, std::span<const BitKey>)>& fn) const;

    /// Bit-packed storage of the actual keys alone.
    std::size_t bytes_actual_keys() const;
    /// Bit-packed storage of actual plus neighbor keys.
    std::size_t bytes_all_keys() const;
    /// Estimated total footprint: hash tables at capacity plus coordinate and
    /// source arrays.
    std::size_t bytes_total() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

}  // namespace voxsynth
