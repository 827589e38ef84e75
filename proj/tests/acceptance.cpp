// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "voxsynth/encoding.hpp"
#include "voxsynth/hash_index.hpp"
#include "voxsynth/kdtree.hpp"
#include "voxsynth/kdtree_synthesis.hpp"
#include "voxsynth/mesh.hpp"
#include "voxsynth/metrics.hpp"
#include "voxsynth/pca.hpp"
#include "voxsynth/phantom.hpp"
#include "voxsynth/resample.hpp"
#include "voxsynth/synthesis.hpp"
#include "voxsynth/terracing.hpp"

using namespace voxsynth;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

VoxelGrid shell(std::int64_t n) { return make_phantom(PhantomKind::sphere_shell, {n, n, n}, standard_shell(n)); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome idempotence() {
    const auto tpl = shell(64);
    SynthesisConfig cfg;
    const auto t0 = Clock::now();
    const auto out = synthesize_level(tpl, tpl, cfg);
    const double secs = seconds_since(t0);
    const auto mismatches = xor_count(out, tpl);
    std::ostringstream os;
    os << "64^3 shell, mismatches " << mismatches << ", " << secs << " s single-threaded (limit 30 s)";
    return {mismatches == 0 && secs < 30.0, os.str()};
}

Outcome lookup_oracle() {
    const std::int64_t n = 32;
    auto p = standard_shell(n);
    p.perturb_rate = 0.05;
    const auto tpl = make_phantom(PhantomKind::sphere_shell, {n, n, n}, p, 2024);
    const int radius = 2;
    const auto index = HashIndex::build(tpl, NeighborhoodSize::three, radius);
    const auto active = active_voxels(tpl, NeighborhoodSize::three);

    std::mt19937_64 rng(77);
    std::int64_t violations = 0, exact = 0, neighbor = 0, fallback = 0;
    for (int q = 0; q < 1000; ++q) {
        // Template keys with 0..3 flipped bits: a mix of all three branches.
        BitKey key = active.keys[rng() % active.size()];
        const int flips = static_cast<int>(rng() % 4);
        for (int f = 0; f < flips; ++f) key.flip(static_cast<int>(rng() % 27));

        std::vector<Coord> scan_exact, scan_near;
        for (std::size_t i = 0; i < active.size(); ++i) {
            const int d = hamming(active.keys[i], key);
            if (d == 0) scan_exact.push_back(active.coords[i]);
            if (d <= radius) scan_near.push_back(active.coords[i]);
        }
        std::sort(scan_exact.begin(), scan_exact.end());
        std::sort(scan_near.begin(), scan_near.end());

        const auto r = index.lookup(key, FallbackPolicy::random, 1, q);
        switch (r.source) {
            case MatchSource::actual:
                ++exact;
                if (r.coords != scan_exact) ++violations;
                break;
            case MatchSource::neighbor:
                ++neighbor;
                if (!scan_exact.empty() || r.coords != scan_near) ++violations;
                for (const auto& c : r.coords) {
                    if (hamming(encode_neighborhood(tpl, c, NeighborhoodSize::three), key) > radius) ++violations;
                }
                break;
            case MatchSource::fallback:
                ++fallback;
                if (!scan_near.empty()) ++violations;
                break;
        }
    }
    std::ostringstream os;
    os << "1000 queries on 32^3: " << exact << " exact, " << neighbor << " neighbor, " << fallback
       << " fallback; violations " << violations;
    return {violations == 0 && exact > 0 && neighbor > 0, os.str()};
}

Outcome ball_sizes() {
    std::mt19937_64 rng(3);
    BitKey k(27);
    for (int i = 0; i < 27; ++i) k.set(i, (rng() & 1u) != 0);
    std::set<std::pair<std::uint64_t, std::uint64_t>> one, upto_two;
    for (int i = 0; i < 27; ++i) {
        BitKey a = k;
        a.flip(i);
        one.insert({a.words()[0], a.words()[1]});
        upto_two.insert({a.words()[0], a.words()[1]});
        for (int j = i + 1; j < 27; ++j) {
            BitKey b = a;
            b.flip(j);
            upto_two.insert({b.words()[0], b.words()[1]});
        }
    }
    auto as_set = [](const std::vector<BitKey>& v) {
        std::set<std::pair<std::uint64_t, std::uint64_t>> s;
        for (const auto& x : v) s.insert({x.words()[0], x.words()[1]});
        return s;
    };
    const auto b1 = hamming_ball(k, 1);
    const auto b2 = hamming_ball(k, 2);
    std::ostringstream os;
    os << "|ball(k,1)| = " << b1.size() << " (enumerated " << one.size() << "), |ball(k,2)| = " << b2.size()
       << " (enumerated " << upto_two.size() << ")";
    const bool ok = b1.size() == 27 && b2.size() == 378 && as_set(b1) == one && as_set(b2) == upto_two;
    return {ok, os.str()};
}

Outcome hit_rate() {
    const auto tpl = shell(128);
    SynthesisConfig cfg;
    cfg.levels = 2;
    const auto r = synthesize_hierarchical(downsample2x(downsample2x(tpl)), tpl, cfg);
    std::ostringstream os;
    os << "128^3 shell from 32^3, per-level hit rate";
    bool ok = !r.levels.empty();
    for (const auto& l : r.levels) {
        os << ' ' << l.hit_rate();
        ok = ok && l.hit_rate() > 0.8;
    }
    os << " (limit > 0.8); dsc " << dsc(r.output, tpl);
    return {ok, os.str()};
}

Outcome kdtree_exact() {
    std::mt19937_64 rng(5);
    auto random_key = [&] {
        BitKey k(27);
        for (int i = 0; i < 27; ++i) k.set(i, (rng() & 1u) != 0);
        return k;
    };
    std::vector<BitKey> keys;
    for (int i = 0; i < 10000; ++i) keys.push_back(random_key());
    const auto model = pca_fit(keys, 20);
    const int d = model.dims();
    std::vector<float> pts;
    pts.reserve(keys.size() * d);
    for (const auto& k : keys) {
        const auto v = pca_project(model, k);
        for (int i = 0; i < d; ++i) pts.push_back(static_cast<float>(v(i)));
    }
    const KdTree tree(pts, d);
    std::int64_t violations = 0;
    for (int q = 0; q < 100; ++q) {
        // Every fourth query is an indexed key, to exercise exact ties.
        const BitKey key = q % 4 == 0 ? keys[rng() % keys.size()] : random_key();
        const auto pv = pca_project(model, key);
        std::vector<float> query(d);
        for (int i = 0; i < d; ++i) query[i] = static_cast<float>(pv(i));
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < keys.size(); ++i) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = static_cast<double>(pts[i * d + k]) - static_cast<double>(query[k]);
                s += diff * diff;
            }
            if (s < best_d) {
                best_d = s;
                best = i;
            }
        }
        if (tree.nearest(query).index != best) ++violations;
    }
    std::ostringstream os;
    os << "10^4 projected points, 100 queries, violations " << violations;
    return {violations == 0, os.str()};
}

Outcome memory_ordering() {
    const auto tpl = shell(64);
    const auto index = HashIndex::build(tpl, NeighborhoodSize::three, 2);
    const std::size_t n = active_voxels(tpl, NeighborhoodSize::three).size();
    const std::size_t keys = index.bytes_actual_keys();
    const std::size_t features = n * 20 * sizeof(float);
    std::ostringstream os;
    os << "64^3 shell, " << n << " active voxels: hash keys " << keys << " B, feature matrix " << features
       << " B (all keys " << index.bytes_all_keys() << " B, full index " << index.bytes_total() << " B)";
    return {keys < features, os.str()};
}

Outcome runtime_256() {
    const std::int64_t n = 256;
    const auto tpl = shell(n);
    const auto guess = upsample_interp(downsample2x(tpl), 2, InterpOrder::trilinear);
    SynthesisConfig cfg;
    cfg.parallel = ParallelMode::shared(4);
    LevelStats stats;
    const auto t0 = Clock::now();
    synthesize_level(guess, tpl, cfg, &stats);
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << "256^3 level, 4 threads: " << secs << " s (index " << stats.seconds_index << " s, synthesis "
       << stats.seconds_synthesis << " s; limit 180 s)";
    return {secs < 180.0, os.str()};
}

Outcome determinism() {
    const auto tpl = shell(128);
    const auto guess = upsample_interp(downsample2x(tpl), 2, InterpOrder::trilinear);
    SynthesisConfig cfg;
    cfg.seed = 9;
    const auto serial = synthesize_level(guess, tpl, cfg);
    cfg.parallel = ParallelMode::shared(4);
    const auto shared = synthesize_level(guess, tpl, cfg);
    cfg.parallel = ParallelMode::partitioned(4);
    const auto part_a = synthesize_level(guess, tpl, cfg);
    const auto part_b = synthesize_level(guess, tpl, cfg);
    std::ostringstream os;
    os << "128^3: shared:4 vs serial differ in " << xor_count(shared, serial) << " voxels; partitioned:4 runs differ in "
       << xor_count(part_a, part_b);
    return {shared == serial && part_a == part_b, os.str()};
}

Outcome metric_examples() {
    auto rel = [](double got, double want) { return std::abs(got - want) <= 1e-12 * std::abs(want); };
    const Dims d{6, 6, 2};
    VoxelGrid a(d), b(d);
    for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 2; ++y) {
            for (int x = 0; x < 2; ++x) a.set(x, y, z, true);
            for (int x = 1; x < 3; ++x) b.set(x, y, z, true);
        }
    VoxelGrid p(d), q(d), r(d);
    p.set(0, 0, 0, true);
    q.set(3, 0, 0, true);
    r.set(3, 4, 0, true);
    const double v_dsc = dsc(a, b), v3 = hausdorff(p, q), v5 = hausdorff(p, r);
    std::ostringstream os;
    os.precision(17);
    os << "dsc " << v_dsc << " (0.5), hd " << v3 << " mm (3.0), hd " << v5 << " mm (5.0)";
    const bool ok = rel(v_dsc, 0.5) && rel(v3, 3.0) && rel(v5, 5.0) && dsc(a, a) == 1.0 && hausdorff(a, a) == 0.0;
    return {ok, os.str()};
}

Outcome mesh_validity() {
    const double radius = 6.0;
    const auto g = make_phantom(PhantomKind::sphere_shell, {16, 16, 16}, {0.0, radius});
    const auto m = marching_cubes(g);
    const double area = surface_area(m), volume = signed_volume(m);
    const double want_area = 4.0 * std::numbers::pi * radius * radius;
    const double want_volume = 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
    const bool watertight = is_watertight(m), oriented = is_consistently_oriented(m);
    std::ostringstream os;
    os << "r=6 sphere: watertight " << watertight << ", oriented " << oriented << ", area " << area << " mm^2 (vs "
       << want_area << "), volume " << volume << " mm^3 (vs " << want_volume << ")";
    const bool ok = watertight && oriented && volume > 0.0 && std::abs(area - want_area) <= 0.15 * want_area &&
                    std::abs(volume - want_volume) <= 0.15 * want_volume;
    return {ok, os.str()};
}

Outcome smoothness() {
    const auto tpl = shell(64);
    const auto coarse = downsample2x(downsample2x(tpl));
    const auto nearest = upsample_interp(coarse, 4, InterpOrder::nearest);
    SynthesisConfig cfg;
    cfg.levels = 2;
    const auto synthesized = synthesize_hierarchical(coarse, tpl, cfg).output;
    const double s_nearest = terracing_stats(nearest).mean_step();
    const double s_synth = terracing_stats(synthesized).mean_step();
    std::ostringstream os;
    os << "64^3 shell mean step: nearest " << s_nearest << ", synthesized " << s_synth;
    return {s_nearest > s_synth, os.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"idempotence", idempotence},       {"lookup oracle", lookup_oracle},  {"hamming balls", ball_sizes},
        {"hit rate", hit_rate},             {"kd-tree exactness", kdtree_exact}, {"memory ordering", memory_ordering},
        {"runtime 256^3", runtime_256},     {"parallel determinism", determinism}, {"metric examples", metric_examples},
        {"mesh validity", mesh_validity},   {"smoothness ordering", smoothness},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %2zu %-22s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
