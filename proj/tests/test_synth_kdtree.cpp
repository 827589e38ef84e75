#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "voxsynth/error.hpp"
#include "voxsynth/kdtree.hpp"
#include "voxsynth/kdtree_synthesis.hpp"
#include "voxsynth/pca.hpp"
#include "voxsynth/phantom.hpp"
#include "voxsynth/resample.hpp"
#include "voxsynth/synthesis.hpp"

using namespace voxsynth;
using testing_support::random_grid;

namespace {

BitKey random_key(int width, std::mt19937_64& rng) {
    BitKey k(width);
    for (int i = 0; i < width; ++i) k.set(i, (rng() & 1u) != 0);
    return k;
}

KdTree::Neighbor brute_nearest(const std::vector<float>& pts, int dims, std::span<const float> q) {
    KdTree::Neighbor best{0, std::numeric_limits<double>::infinity()};
    const std::size_t n = pts.size() / static_cast<std::size_t>(dims);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (int k = 0; k < dims; ++k) {
            const double diff = static_cast<double>(pts[i * dims + k]) - static_cast<double>(q[k]);
            d += diff * diff;
        }
        if (d < best.distance_sq) best = {i, d};
    }
    return best;
}

VoxelGrid shell(std::int64_t n) { return make_phantom(PhantomKind::sphere_shell, {n, n, n}, standard_shell(n)); }

}  // namespace

TEST_SUITE("pca") {
    TEST_CASE("basis is orthonormal and the mean projects to zero") {
        std::mt19937_64 rng(1);
        std::vector<BitKey> keys;
        for (int i = 0; i < 500; ++i) keys.push_back(random_key(27, rng));
        const auto m = pca_fit(keys, 20);
        CHECK(m.dims() == 20);
        CHECK(m.width() == 27);
        const Eigen::MatrixXd gram = m.basis.transpose() * m.basis;
        CHECK((gram - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(pca_project(m, Eigen::VectorXd(m.mean)).norm() < 1e-12);
        for (int c = 0; c < m.dims(); ++c) {
            Eigen::Index at = 0;
            m.basis.col(c).cwiseAbs().maxCoeff(&at);
            CHECK(m.basis(at, c) > 0.0);
        }
        for (int c = 1; c < m.dims(); ++c) CHECK(m.variances(c - 1) >= m.variances(c));
    }

    TEST_CASE("low-rank features reconstruct exactly") {
        // Rows spanned by 3 fixed patterns: rank <= 3 after centering.
        std::mt19937_64 rng(2);
        std::vector<BitKey> basis{random_key(27, rng), random_key(27, rng), random_key(27, rng)};
        std::vector<BitKey> keys;
        for (int i = 0; i < 60; ++i) keys.push_back(basis[i % 3]);
        keys.push_back(basis[0]);
        const auto m = pca_fit(keys, 3);
        for (const auto& k : keys) {
            const auto back = pca_reconstruct(m, pca_project(m, k));
            CHECK((back - key_to_vector(k)).cwiseAbs().maxCoeff() < 1e-9);
        }
    }

    TEST_CASE("two points project symmetrically") {
        BitKey a(27), b(27);
        for (int i = 0; i < 9; ++i) b.set(i);
        const std::vector<BitKey> keys{a, b};
        const auto m = pca_fit(keys, 1);
        const double pa = pca_project(m, a)(0);
        const double pb = pca_project(m, b)(0);
        CHECK(std::abs(pa + pb) < 1e-12);
        CHECK(std::abs(std::abs(pa) - 1.5) < 1e-12);  // half of sqrt(9)
    }

    TEST_CASE("projection contracts distances") {
        std::mt19937_64 rng(3);
        std::vector<BitKey> keys;
        for (int i = 0; i < 1000; ++i) keys.push_back(random_key(27, rng));
        const auto m = pca_fit(keys, 20);
        for (int t = 0; t < 2000; ++t) {
            const auto& a = keys[rng() % keys.size()];
            const auto& b = keys[rng() % keys.size()];
            const double proj = (pca_project(m, a) - pca_project(m, b)).norm();
            CHECK(proj <= std::sqrt(static_cast<double>(hamming(a, b))) + 1e-9);
        }
    }

    TEST_CASE("invalid fits") {
        std::vector<BitKey> same(10, BitKey(27));
        CHECK_THROWS_WITH_AS(pca_fit(same, 2), doctest::Contains("variance"), ValidationError);
        std::mt19937_64 rng(4);
        std::vector<BitKey> few{random_key(27, rng), random_key(27, rng)};
        CHECK_THROWS_AS(pca_fit(few, 3), ValidationError);
        CHECK_THROWS_AS(pca_fit(few, 0), ValidationError);
        std::vector<BitKey> many;
        for (int i = 0; i < 40; ++i) many.push_back(random_key(27, rng));
        CHECK_THROWS_AS(pca_fit(many, 28), ValidationError);
        const auto m = pca_fit(many, 5);
        CHECK_THROWS_AS(pca_project(m, BitKey(125)), ValidationError);
    }
}

TEST_SUITE("kdtree") {
    TEST_CASE("single point and exact hits") {
        const KdTree one({1.0f, 2.0f}, 2);
        const float q[2] = {-5.0f, 9.0f};
        CHECK(one.nearest(q).index == 0);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<float> u(-1.0f, 1.0f);
        std::vector<float> pts(300 * 4);
        for (auto& v : pts) v = u(rng);
        const KdTree tree(pts, 4);
        for (std::size_t i = 0; i < 300; i += 17) {
            const auto r = tree.nearest(tree.point(i));
            CHECK(r.distance_sq == 0.0);
            CHECK(r.index == i);
        }
    }

    TEST_CASE("matches brute force on random points") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<float> u(-2.0f, 2.0f);
        for (int dims : {1, 3, 8, 20}) {
            std::vector<float> pts(1000 * static_cast<std::size_t>(dims));
            for (auto& v : pts) v = u(rng);
            const KdTree tree(pts, dims);
            std::vector<float> q(static_cast<std::size_t>(dims));
            for (int t = 0; t < 100; ++t) {
                for (auto& v : q) v = u(rng);
                const auto got = tree.nearest(q);
                const auto want = brute_nearest(pts, dims, q);
                CHECK(got.index == want.index);
                CHECK(got.distance_sq == doctest::Approx(want.distance_sq).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("ties go to the smallest index") {
        // Many duplicated and grid-aligned points produce exact ties.
        std::mt19937_64 rng(7);
        std::vector<float> pts;
        for (int i = 0; i < 2000; ++i) {
            pts.push_back(static_cast<float>(rng() % 4));
            pts.push_back(static_cast<float>(rng() % 4));
            pts.push_back(static_cast<float>(rng() % 4));
        }
        const KdTree tree(pts, 3);
        for (int t = 0; t < 200; ++t) {
            const float q[3] = {static_cast<float>(rng() % 7) * 0.5f, static_cast<float>(rng() % 7) * 0.5f,
                                static_cast<float>(rng() % 7) * 0.5f};
            const auto want = brute_nearest(pts, 3, q);
            CHECK(tree.nearest(q).index == want.index);
        }
    }

    TEST_CASE("invalid trees") {
        CHECK_THROWS_AS(KdTree({}, 3), ValidationError);
        CHECK_THROWS_AS(KdTree(std::vector<float>(33, 0.0f), 33), ValidationError);
        CHECK_THROWS_AS(KdTree(std::vector<float>(5, 0.0f), 2), ValidationError);
        const KdTree tree({0.0f, 0.0f}, 2);
        const float q[3] = {0, 0, 0};
        CHECK_THROWS_AS(tree.nearest(q), ValidationError);
    }
}

TEST_SUITE("linear scan") {
    TEST_CASE("examples") {
        std::mt19937_64 rng(8);
        std::vector<BitKey> keys{BitKey(27), BitKey::all_ones(27)};
        BitKey q(27);
        for (int i = 0; i < 5; ++i) q.set(i * 3);
        const auto m = linear_nns(keys, q);
        CHECK(m.index == 0);
        CHECK(m.distance == 5);
        keys.push_back(q);
        keys.push_back(q);
        const auto exact = linear_nns(keys, q);
        CHECK(exact.index == 2);
        CHECK(exact.distance == 0);
        CHECK_THROWS_AS(linear_nns({}, q), ValidationError);
    }
}

TEST_SUITE("kdtree synthesis") {
    TEST_CASE("self-synthesis is a fixed point") {
        const auto tpl = shell(32);
        const auto index = build_kdtree_index(tpl, NeighborhoodSize::three, 20);
        SynthesisConfig cfg;
        KdTreeStats stats;
        CHECK(synthesize_level_kdtree(tpl, tpl, index, cfg, &stats) == tpl);
        CHECK(stats.exact_hits == stats.queries);
        CHECK(stats.bytes_features == index.active_count * 20 * sizeof(float));
        CHECK(synthesize_level_kdtree(VoxelGrid(tpl.dims()), tpl, index, cfg).empty());
    }

    TEST_CASE("tree points are distinct keys in first-seen order") {
        const auto tpl = shell(32);
        const auto index = build_kdtree_index(tpl, NeighborhoodSize::three, 20);
        const auto active = active_voxels(tpl, NeighborhoodSize::three);
        CHECK(index.active_count == active.size());
        CHECK(index.tree.size() == index.keys.size());
        for (std::size_t i = 0; i < index.keys.size(); ++i) {
            const auto first = std::find(active.keys.begin(), active.keys.end(), index.keys[i]);
            REQUIRE(first != active.keys.end());
            CHECK(index.coords[i] == active.coords[static_cast<std::size_t>(first - active.keys.begin())]);
        }
    }

    TEST_CASE("not worse than the hash method on a noisy template") {
        const std::int64_t n = 48;
        const auto tpl = shell(n);
        auto p = standard_shell(n);
        p.perturb_rate = 0.02;
        const auto noisy = make_phantom(PhantomKind::sphere_shell, {n, n, n}, p, 99);
        SynthesisConfig cfg;
        const auto hash_out = synthesize_level(noisy, tpl, cfg);
        const auto index = build_kdtree_index(tpl, NeighborhoodSize::three, 20);
        const auto kd_out = synthesize_level_kdtree(noisy, tpl, index, cfg);
        MESSAGE("errors: noisy " << xor_count(noisy, tpl) << ", hash " << xor_count(hash_out, tpl) << ", kdtree "
                                 << xor_count(kd_out, tpl));
        CHECK(xor_count(kd_out, tpl) <= xor_count(hash_out, tpl));
    }

    TEST_CASE("shared workers match serial") {
        const auto tpl = shell(32);
        const auto guess = upsample_interp(downsample2x(tpl), 2, InterpOrder::trilinear);
        const auto index = build_kdtree_index(tpl, NeighborhoodSize::three, 20);
        SynthesisConfig cfg;
        const auto serial = synthesize_level_kdtree(guess, tpl, index, cfg);
        cfg.parallel = ParallelMode::shared(4);
        CHECK(synthesize_level_kdtree(guess, tpl, index, cfg) == serial);
    }

    TEST_CASE("hierarchical run") {
        const auto tpl = shell(64);
        SynthesisConfig cfg;
        cfg.levels = 2;
        const auto r = synthesize_hierarchical_kdtree(downsample2x(downsample2x(tpl)), tpl, cfg, 20);
        CHECK(r.output.dims() == tpl.dims());
        CHECK(r.levels.size() == 2);
        CHECK(static_cast<double>(xor_count(r.output, tpl)) / static_cast<double>(tpl.count()) < 0.5);
    }

    TEST_CASE("invalid indexes") {
        CHECK_THROWS_AS(build_kdtree_index(VoxelGrid({8, 8, 8}), NeighborhoodSize::three, 20), ValidationError);
        VoxelGrid g({8, 8, 8});
        g.set(4, 4, 4, true);
        CHECK(build_kdtree_index(g, NeighborhoodSize::three, 20).keys.size() == 27);
        CHECK_THROWS_AS(build_kdtree_index(g, NeighborhoodSize::three, 28), ValidationError);
    }
}
