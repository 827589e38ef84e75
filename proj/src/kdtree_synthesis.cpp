#include "voxsynth/kdtree_synthesis.hpp"

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <chrono>

#include "voxsynth/error.hpp"
#include "voxsynth/parallel.hpp"
#include "voxsynth/synthesis.hpp"

namespace voxsynth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<float> project_to_float(const PcaModel& model, const BitKey& key) {
    const Eigen::VectorXd p = pca_project(model, key);
    std::vector<float> out(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = static_cast<float>(p[i]);
    return out;
}

}  // namespace

KdTreeIndex build_kdtree_index(const VoxelGrid& template_level, NeighborhoodSize nbhd, int d) {
    const ActiveSet active = active_voxels(template_level, nbhd);
    if (active.size() == 0) throw ValidationError("kd-tree index: template level has no active voxels");

    KdTreeIndex index;
    index.nbhd = nbhd;
    index.source_dims = template_level.dims();
    index.active_count = active.size();
    index.model = pca_fit(std::span<const BitKey>(active.keys), d);

    absl::flat_hash_map<BitKey, std::uint32_t> seen;
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (seen.try_emplace(active.keys[i], static_cast<std::uint32_t>(index.keys.size())).second) {
            index.keys.push_back(active.keys[i]);
            index.coords.push_back(active.coords[i]);
        }
    }
    std::vector<float> points;
    points.reserve(index.keys.size() * static_cast<std::size_t>(d));
    for (const auto& key : index.keys) {
        const auto p = project_to_float(index.model, key);
        points.insert(points.end(), p.begin(), p.end());
    }
    index.tree = KdTree(std::move(points), d);
    return index;
}

VoxelGrid synthesize_level_kdtree(const VoxelGrid& coarse_up, const VoxelGrid& template_level,
                                  const KdTreeIndex& index, const SynthesisConfig& cfg, KdTreeStats* stats) {
    cfg.validate();
    if (coarse_up.dims() != template_level.dims()) throw ValidationError("synthesize_level_kdtree: dims mismatch");
    if (index.source_dims != template_level.dims()) {
        throw ValidationError("synthesize_level_kdtree: index was built for a different template level");
    }
    if (index.nbhd != cfg.nbhd) throw ValidationError("synthesize_level_kdtree: index width mismatch");

    const auto t0 = Clock::now();
    const auto queries = active_indices(coarse_up, cfg.nbhd);
    VoxelGrid out = coarse_up;
    int workers = cfg.parallel.kind == ParallelMode::Kind::serial ? 1 : cfg.parallel.workers;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(queries.size() / 1024) + 1));
    std::vector<std::size_t> bounds{0};
    for (int w = 1; w < workers; ++w) {
        std::size_t b = std::max(queries.size() * static_cast<std::size_t>(w) / static_cast<std::size_t>(workers),
                                 bounds.back());
        while (b > 0 && b < queries.size() && (queries[b] >> 6) == (queries[b - 1] >> 6)) ++b;
        bounds.push_back(b);
    }
    bounds.push_back(queries.size());
    std::vector<std::int64_t> exact(static_cast<std::size_t>(workers), 0);
    parallel_for(workers, workers, [&](int w) {
        for (std::size_t q = bounds[w]; q < bounds[w + 1]; ++q) {
            const Coord c = coarse_up.coord_of(queries[q]);
            const auto projected = project_to_float(index.model, encode_neighborhood(coarse_up, c, cfg.nbhd));
            const auto nn = index.tree.nearest(projected);
            if (nn.distance_sq == 0.0) ++exact[w];
            out.set(queries[q], template_level.get(index.coords[nn.index]));
        }
    });
    if (stats != nullptr) {
        stats->dims = coarse_up.dims();
        stats->d = index.model.dims();
        stats->points = index.tree.size();
        stats->active_count = index.active_count;
        stats->queries = static_cast<std::int64_t>(queries.size());
        stats->exact_hits = 0;
        for (auto e : exact) stats->exact_hits += e;
        stats->bytes_features = index.bytes_features();
        stats->bytes_tree = index.tree.bytes_points();
        stats->seconds_synthesis = seconds_since(t0);
    }
    return out;
}

KdTreeHierarchyResult synthesize_hierarchical_kdtree(const VoxelGrid& coarse, const VoxelGrid& template_full,
                                                     const SynthesisConfig& cfg, int d) {
    cfg.validate();
    const std::int64_t scale = std::int64_t{1} << cfg.levels;
    const Dims& c = coarse.dims();
    const Dims& t = template_full.dims();
    if (t.nx != c.nx * scale || t.ny != c.ny * scale || t.nz != c.nz * scale) {
        throw ValidationError("template dims must equal coarse dims x 2^levels");
    }
    const Pyramid pyramid = build_pyramid(template_full, cfg.levels, cfg.pyramid);
    KdTreeHierarchyResult result;
    VoxelGrid current = coarse;
    for (int level = 1; level <= cfg.levels; ++level) {
        VoxelGrid guess = upsample_interp(current, 2, cfg.level_upsample);
        guess.set_spacing(pyramid.levels[level].spacing());
        KdTreeStats stats;
        if (pyramid.levels[level].empty()) {
            // Nothing to match against; the guess passes through.
            stats.dims = guess.dims();
            current = std::move(guess);
        } else {
            const auto t0 = Clock::now();
            const KdTreeIndex index = build_kdtree_index(pyramid.levels[level], cfg.nbhd, d);
            const double build_seconds = seconds_since(t0);
            current = synthesize_level_kdtree(guess, pyramid.levels[level], index, cfg, &stats);
            stats.seconds_index = build_seconds;
        }
        result.levels.push_back(stats);
    }
    result.output = std::move(current);
    return result;
}

}  // namespace voxsynth
