#include "voxsynth/synthesis_config.hpp"

#include "voxsynth/error.hpp"

namespace voxsynth {

void SynthesisConfig::validate() const {
    const int width = key_width(nbhd);
    if (radius < 0 || radius > width) throw ValidationError("radius must be in [0, " + std::to_string(width) + "]");
    if (levels < 1) throw ValidationError("levels must be >= 1");
    if (parallel.workers < 1) throw ValidationError("parallel worker count must be >= 1");
    if (parallel.kind == ParallelMode::Kind::partitioned_index) {
        const int p = parallel.workers;
        if (p != 1 && p != 2 && p != 4 && p != 8) {
            throw ValidationError("partitioned mode supports 1, 2, 4 or 8 parts, got " + std::to_string(p));
        }
    }
    if (pyramid.smoothing == Smoothing::gaussian && !(pyramid.sigma > 0.0)) {
        throw ValidationError("pyramid sigma must be > 0");
    }
}

FallbackPolicy parse_fallback(const std::string& s) {
    if (s == "random") return FallbackPolicy::random;
    if (s == "keep" || s == "keep_coarse") return FallbackPolicy::keep_coarse;
    if (s == "majority") return FallbackPolicy::majority;
    throw ValidationError("unknown fallback '" + s + "' (random, keep, majority)");
}

std::string to_string(FallbackPolicy p) {
    switch (p) {
        case FallbackPolicy::random: return "random";
        case FallbackPolicy::keep_coarse: return "keep";
        case FallbackPolicy::majority: return "majority";
    }
    return "?";
}

ParallelMode parse_parallel(const std::string& s) {
    if (s == "serial") return ParallelMode::serial();
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ValidationError("parallel mode must be serial, shared:P or partitioned:P");
    const std::string kind = s.substr(0, colon);
    int p = 0;
    try {
        std::size_t used = 0;
        p = std::stoi(s.substr(colon + 1), &used);
        if (used != s.size() - colon - 1) p = 0;
    } catch (const std::exception&) {
        p = 0;
    }
    if (p < 1) throw ValidationError("bad worker count in parallel mode '" + s + "'");
    if (kind == "shared") return ParallelMode::shared(p);
    if (kind == "partitioned") return ParallelMode::partitioned(p);
    throw ValidationError("unknown parallel mode '" + kind + "'");
}

std::string to_string(const ParallelMode& m) {
    switch (m.kind) {
        case ParallelMode::Kind::serial: return "serial";
        case ParallelMode::Kind::shared_index: return "shared:" + std::to_string(m.workers);
        case ParallelMode::Kind::partitioned_index: return "partitioned:" + std::to_string(m.workers);
    }
    return "?";
}

bool fallback_coin(std::uint64_t seed, std::int64_t linear_index) {
    // splitmix64 finalizer
    std::uint64_t z = seed ^ static_cast<std::uint64_t>(linear_index);
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return (z >> 63) != 0;
}

}  // namespace voxsynth
