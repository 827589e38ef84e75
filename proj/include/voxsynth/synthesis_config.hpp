#pragma once

#include <cstdint>
#include <string>

#include "voxsynth/encoding.hpp"
#include "voxsynth/resample.hpp"

namespace voxsynth {

/// What to write when a key has no template match within the Hamming radius.
enum class FallbackPolicy {
    random,       ///< one seeded coin flip per voxel
    keep_coarse,  ///< keep the voxel's current (coarse) value
    majority,     ///< 1 iff more than half of the neighborhood is occupied
};

struct ParallelMode {
    enum class Kind {
        serial,
        shared_index,       ///< one index, query voxels split across workers
        partitioned_index,  ///< volume split into subvolumes, one index each
    };
    Kind kind = Kind::serial;
    int workers = 1;

    static ParallelMode serial() { return {}; }
    static ParallelMode shared(int p) { return {Kind::shared_index, p}; }
    static ParallelMode partitioned(int p) { return {Kind::partitioned_index, p}; }
};

struct SynthesisConfig {
    NeighborhoodSize nbhd = NeighborhoodSize::three;
    int radius = 2;
    FallbackPolicy fallback = FallbackPolicy::random;
    int levels = 2;
    ParallelMode parallel;
    std::uint64_t seed = 0;
    /// How each level's starting guess is formed from the previous result.
    InterpOrder level_upsample = InterpOrder::trilinear;
    DownsampleOptions pyramid;

    /// Throws ValidationError on out-of-range values.
    void validate() const;
};

FallbackPolicy parse_fallback(const std::string& s);
std::string to_string(FallbackPolicy p);
/// Accepts "serial", "shared:P" and "partitioned:P".
ParallelMode parse_parallel(const std::string& s);
std::string to_string(const ParallelMode& m);

/// Counter-based coin flip: the same (seed, voxel) always yields the same bit
/// regardless of evaluation order.
bool fallback_coin(std::uint64_t seed, std::int64_t linear_index);

}  // namespace voxsynth
