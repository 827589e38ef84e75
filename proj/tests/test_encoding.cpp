#include <set>

#include "doctest.h"
#include "support.hpp"

#include "voxsynth/encoding.hpp"
#include "voxsynth/error.hpp"

using namespace voxsynth;
using testing_support::random_grid;

namespace {

BitKey random_key(int width, std::mt19937_64& rng) {
    BitKey k(width);
    for (int i = 0; i < width; ++i) k.set(i, (rng() & 1u) != 0);
    return k;
}

/// Every key reachable by flipping exactly `d` distinct bits, by direct
/// nested enumeration of bit positions.
std::set<std::pair<std::uint64_t, std::uint64_t>> flips(const BitKey& k, int d) {
    std::set<std::pair<std::uint64_t, std::uint64_t>> out;
    const int w = k.width();
    if (d == 1) {
        for (int i = 0; i < w; ++i) {
            BitKey c = k;
            c.flip(i);
            out.insert({c.words()[0], c.words()[1]});
        }
    } else if (d == 2) {
        for (int i = 0; i < w; ++i)
            for (int j = i + 1; j < w; ++j) {
                BitKey c = k;
                c.flip(i);
                c.flip(j);
                out.insert({c.words()[0], c.words()[1]});
            }
    }
    return out;
}

}  // namespace

TEST_SUITE("encoding") {
    TEST_CASE("key widths and center bit") {
        CHECK(key_width(NeighborhoodSize::three) == 27);
        CHECK(key_width(NeighborhoodSize::five) == 125);
        CHECK(neighborhood_from_int(5) == NeighborhoodSize::five);
        CHECK_THROWS_AS(neighborhood_from_int(4), ValidationError);
        BitKey k(27);
        k.set(13);
        CHECK(k.center());
        CHECK(k.words_used() == 1);
        CHECK(BitKey(125).words_used() == 2);
    }

    TEST_CASE("encode empty, full and single-voxel grids") {
        const VoxelGrid empty({8, 8, 8});
        CHECK(encode_neighborhood(empty, {3, 3, 3}, NeighborhoodSize::three) == BitKey(27));
        const auto full = VoxelGrid::full({8, 8, 8});
        CHECK(encode_neighborhood(full, {3, 3, 3}, NeighborhoodSize::three) == BitKey::all_ones(27));
        CHECK(encode_neighborhood(full, {3, 3, 3}, NeighborhoodSize::five) == BitKey::all_ones(125));
        VoxelGrid one({16, 16, 16});
        one.set(5, 5, 5, true);
        const auto k = encode_neighborhood(one, {5, 5, 5}, NeighborhoodSize::three);
        CHECK(k.popcount() == 1);
        CHECK(k.test(13));
        const auto k5 = encode_neighborhood(one, {5, 5, 5}, NeighborhoodSize::five);
        CHECK(k5.popcount() == 1);
        CHECK(k5.test(62));
    }

    TEST_CASE("bit index follows the offset formula") {
        const auto g = random_grid({9, 9, 9}, 0.5, 4);
        for (int r : {1, 2}) {
            const auto size = r == 1 ? NeighborhoodSize::three : NeighborhoodSize::five;
            const int side = 2 * r + 1;
            for (Coord c : {Coord{4, 4, 4}, Coord{0, 0, 0}, Coord{8, 3, 1}}) {
                const auto k = encode_neighborhood(g, c, size);
                for (int dz = -r; dz <= r; ++dz)
                    for (int dy = -r; dy <= r; ++dy)
                        for (int dx = -r; dx <= r; ++dx) {
                            const int i = (dz + r) * side * side + (dy + r) * side + (dx + r);
                            CHECK(k.test(i) == g.get_or_zero(c.x + dx, c.y + dy, c.z + dz));
                        }
            }
        }
    }

    TEST_CASE("outside coordinates are rejected") {
        CHECK_THROWS_AS(encode_neighborhood(VoxelGrid({4, 4, 4}), {4, 0, 0}, NeighborhoodSize::three),
                        ValidationError);
    }

    TEST_CASE("one changed cell moves the key by one") {
        auto g = random_grid({8, 8, 8}, 0.5, 8);
        const auto before = encode_neighborhood(g, {4, 4, 4}, NeighborhoodSize::three);
        g.set(5, 3, 4, !g.get(5, 3, 4));
        const auto after = encode_neighborhood(g, {4, 4, 4}, NeighborhoodSize::three);
        CHECK(hamming(before, after) == 1);
    }

    TEST_CASE("hamming examples") {
        std::mt19937_64 rng(1);
        const auto k = random_key(27, rng);
        CHECK(hamming(k, k) == 0);
        CHECK(hamming(k, k.complement()) == 27);
        auto m = k;
        for (int b : {0, 13, 26}) m.flip(b);
        CHECK(hamming(k, m) == 3);
        CHECK_THROWS_AS(hamming(BitKey(27), BitKey(125)), ValidationError);
    }

    TEST_CASE("hamming is a metric") {
        std::mt19937_64 rng(2);
        for (int t = 0; t < 300; ++t) {
            const int w = t % 2 == 0 ? 27 : 125;
            const auto a = random_key(w, rng), b = random_key(w, rng), c = random_key(w, rng);
            CHECK(hamming(a, b) == hamming(b, a));
            CHECK((hamming(a, b) == 0) == (a == b));
            CHECK(hamming(a, c) <= hamming(a, b) + hamming(b, c));
            CHECK(hamming(a, b) <= w);
        }
    }

    TEST_CASE("complement keeps bits above the width clear") {
        const auto c = BitKey(27).complement();
        CHECK(c.popcount() == 27);
        CHECK(c == BitKey::all_ones(27));
        CHECK(BitKey(125).complement().popcount() == 125);
    }

    TEST_CASE("hamming ball sizes against flip enumeration") {
        std::mt19937_64 rng(3);
        const auto k = random_key(27, rng);
        CHECK(hamming_ball(k, 0).empty());
        const auto b1 = hamming_ball(k, 1);
        const auto b2 = hamming_ball(k, 2);
        const auto f1 = flips(k, 1);
        const auto f2 = flips(k, 2);
        CHECK(b1.size() == 27);
        CHECK(f1.size() == 27);
        CHECK(b2.size() == 378);
        CHECK(f1.size() + f2.size() == 378);
        std::set<std::pair<std::uint64_t, std::uint64_t>> got;
        for (const auto& x : b2) got.insert({x.words()[0], x.words()[1]});
        std::set<std::pair<std::uint64_t, std::uint64_t>> want = f1;
        want.insert(f2.begin(), f2.end());
        CHECK(got == want);
        for (const auto& x : b2) {
            CHECK(hamming(k, x) >= 1);
            CHECK(hamming(k, x) <= 2);
        }
        CHECK(hamming_ball_size(27, 2) == 378);
        CHECK(hamming_ball_size(125, 2) == 125 + 7750);
        CHECK(hamming_ball_size(27, 3) == 378 + 2925);
    }

    TEST_CASE("ball size does not depend on the key") {
        std::mt19937_64 rng(4);
        for (int t = 0; t < 5; ++t) CHECK(hamming_ball(random_key(27, rng), 2).size() == 378);
        CHECK(hamming_ball(random_key(125, rng), 1).size() == 125);
    }

    TEST_CASE("active set examples") {
        CHECK(active_voxels(VoxelGrid({8, 8, 8}), NeighborhoodSize::three).size() == 0);
        VoxelGrid one({16, 16, 16});
        one.set(5, 5, 5, true);
        const auto a = active_voxels(one, NeighborhoodSize::three);
        CHECK(a.size() == 27);
        for (const auto& c : a.coords) {
            CHECK(std::abs(c.x - 5) <= 1);
            CHECK(std::abs(c.y - 5) <= 1);
            CHECK(std::abs(c.z - 5) <= 1);
        }
        CHECK(active_voxels(one, NeighborhoodSize::five).size() == 125);
        CHECK(active_voxels(VoxelGrid::full({4, 4, 4}), NeighborhoodSize::three).size() == 64);
    }

    TEST_CASE("active set matches a direct neighborhood scan") {
        const auto g = random_grid({12, 10, 9}, 0.02, 6);
        for (auto size : {NeighborhoodSize::three, NeighborhoodSize::five}) {
            const auto a = active_voxels(g, size);
            std::vector<Coord> expected;
            for (std::int64_t i = 0; i < g.size(); ++i) {
                const auto c = g.coord_of(i);
                if (encode_neighborhood(g, c, size).popcount() > 0) expected.push_back(c);
            }
            CHECK(a.coords == expected);
            CHECK(std::is_sorted(a.coords.begin(), a.coords.end()));
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a.keys[i] == encode_neighborhood(g, a.coords[i], size));
                CHECK(a.keys[i].popcount() > 0);
            }
            const auto idx = active_indices(g, size);
            REQUIRE(idx.size() == a.size());
            for (std::size_t i = 0; i < idx.size(); ++i) CHECK(g.coord_of(idx[i]) == a.coords[i]);
        }
    }

    TEST_CASE("occupied voxels are always active") {
        const auto g = random_grid({10, 10, 10}, 0.1, 7);
        const auto idx = active_indices(g, NeighborhoodSize::three);
        const std::set<std::int64_t> s(idx.begin(), idx.end());
        g.for_each_set([&](std::int64_t i) { CHECK(s.contains(i)); });
    }
}
