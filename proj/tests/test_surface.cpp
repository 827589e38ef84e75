#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "voxsynth/error.hpp"
#include "voxsynth/mesh.hpp"
#include "voxsynth/phantom.hpp"
#include "voxsynth/terracing.hpp"

using namespace voxsynth;
using testing_support::random_grid;
using testing_support::TempDir;

namespace {

VoxelGrid solid_sphere(std::int64_t n, double r) { return make_phantom(PhantomKind::sphere_shell, {n, n, n}, {0.0, r}); }

bool is_half_integer(double v) { return std::abs(v - std::floor(v) - 0.5) < 1e-12; }
bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

}  // namespace

TEST_SUITE("marching cubes") {
    TEST_CASE("empty grid gives an empty mesh") {
        const auto m = marching_cubes(VoxelGrid({6, 6, 6}));
        CHECK(m.empty());
        CHECK(m.vertices.empty());
        CHECK(surface_area(m) == 0.0);
        CHECK(signed_volume(m) == 0.0);
    }

    TEST_CASE("single voxel is an octahedron") {
        VoxelGrid g({3, 3, 3});
        g.set(1, 1, 1, true);
        const auto m = marching_cubes(g);
        CHECK(m.triangles.size() == 8);
        CHECK(m.vertices.size() == 6);
        CHECK(is_watertight(m));
        CHECK(is_consistently_oriented(m));
        // Half-diagonal 0.5: volume 4/3 * 0.5^3, area 8 equilateral triangles of side sqrt(0.5).
        CHECK(signed_volume(m) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        CHECK(surface_area(m) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    }

    TEST_CASE("objects touching the boundary still close") {
        const auto m = marching_cubes(VoxelGrid::full({4, 3, 2}));
        CHECK(is_watertight(m));
        CHECK(is_consistently_oriented(m));
        CHECK(signed_volume(m) > 0.0);
    }

    TEST_CASE("case table covers complements") {
        const auto& t = marching_cubes_table();
        CHECK(t[0].empty());
        CHECK(t[255].empty());
        for (int c = 1; c < 255; ++c) {
            CHECK_FALSE(t[c].empty());
            for (const auto& tri : t[c]) {
                for (auto e : tri) CHECK(e < 12);
            }
        }
    }

    TEST_CASE("random grids are watertight and oriented") {
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            const double p = 0.1 + 0.07 * static_cast<double>(seed % 10);
            const auto g = random_grid({7, 6, 5}, p, seed);
            const auto m = marching_cubes(g);
            CAPTURE(seed);
            CHECK(is_watertight(m));
            CHECK(is_consistently_oriented(m));
            CHECK(signed_volume(m) > 0.0);
        }
    }

    TEST_CASE("vertices sit on edge midpoints") {
        const auto m = marching_cubes(random_grid({6, 6, 6}, 0.4, 3));
        for (const auto& v : m.vertices) {
            int halves = 0, ints = 0;
            for (double c : v) {
                halves += is_half_integer(c);
                ints += is_integer(c);
            }
            CHECK(halves == 1);
            CHECK(ints == 2);
        }
    }

    TEST_CASE("sphere area and volume") {
        const double r = 6.0;
        const auto m = marching_cubes(solid_sphere(17, r));
        CHECK(is_watertight(m));
        CHECK(is_consistently_oriented(m));
        const double area = 4.0 * std::numbers::pi * r * r;
        const double volume = 4.0 / 3.0 * std::numbers::pi * r * r * r;
        MESSAGE("area " << surface_area(m) << " vs " << area << ", volume " << signed_volume(m) << " vs " << volume);
        CHECK(std::abs(surface_area(m) - area) <= 0.15 * area);
        CHECK(std::abs(signed_volume(m) - volume) <= 0.15 * volume);
    }

    TEST_CASE("spacing scales the mesh") {
        VoxelGrid g({3, 3, 3}, {2.0, 1.0, 0.5});
        g.set(1, 1, 1, true);
        const auto m = marching_cubes(g);
        CHECK(signed_volume(m) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        for (const auto& v : m.vertices) {
            CHECK(v[0] >= 1.0);
            CHECK(v[0] <= 3.0);
        }
    }
}

TEST_SUITE("mesh export") {
    TEST_CASE("STL of an empty mesh has a zero count") {
        TempDir dir("stl_empty");
        export_mesh(Mesh{}, dir / "e.stl");
        CHECK(std::filesystem::file_size(dir / "e.stl") == 84);
        CHECK(read_stl(dir / "e.stl").empty());
    }

    TEST_CASE("STL normal follows the winding") {
        TempDir dir("stl_tri");
        Mesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
        m.triangles = {{0, 1, 2}};
        export_mesh(m, dir / "t.stl");
        CHECK(std::filesystem::file_size(dir / "t.stl") == 84 + 50);
        const auto tris = read_stl(dir / "t.stl");
        REQUIRE(tris.size() == 1);
        CHECK(tris[0].normal == std::array<float, 3>{0.0f, 0.0f, 1.0f});
        CHECK(tris[0].vertices[1] == std::array<float, 3>{1.0f, 0.0f, 0.0f});
    }

    TEST_CASE("STL triangle count matches the mesh") {
        TempDir dir("stl_sphere");
        const auto m = marching_cubes(solid_sphere(11, 3.5));
        export_mesh(m, dir / "s.stl", MeshFormat::stl_binary);
        const auto tris = read_stl(dir / "s.stl");
        REQUIRE(tris.size() == m.triangles.size());
        for (std::size_t i = 0; i < tris.size(); ++i) {
            for (int v = 0; v < 3; ++v) {
                for (int k = 0; k < 3; ++k) {
                    CHECK(tris[i].vertices[v][k] == static_cast<float>(m.vertices[m.triangles[i][v]][k]));
                }
            }
        }
    }

    TEST_CASE("OBJ round trip") {
        TempDir dir("obj");
        const auto m = marching_cubes(random_grid({5, 5, 5}, 0.3, 9));
        export_mesh(m, dir / "m.obj");
        CHECK(read_obj(dir / "m.obj") == m);
    }

    TEST_CASE("format errors") {
        CHECK(mesh_format_from_path("a.stl") == MeshFormat::stl_binary);
        CHECK(mesh_format_from_path("a.obj") == MeshFormat::obj);
        CHECK_THROWS_AS(mesh_format_from_path("a.ply"), ValidationError);
        TempDir dir("bad_stl");
        {
            std::ofstream f(dir / "short.stl", std::ios::binary);
            f << "abc";
        }
        CHECK_THROWS_AS(read_stl(dir / "short.stl"), ValidationError);
        CHECK_THROWS_AS(read_stl(dir / "missing.stl"), IoError);
        CHECK_THROWS_AS(export_mesh(Mesh{}, dir / "no" / "such" / "dir.stl"), IoError);
    }
}

TEST_SUITE("terracing") {
    TEST_CASE("flat half-space has no steps") {
        VoxelGrid g({8, 8, 8});
        for (std::int64_t z = 0; z <= 3; ++z)
            for (std::int64_t y = 0; y < 8; ++y)
                for (std::int64_t x = 0; x < 8; ++x) g.set(x, y, z, true);
        const auto h = terracing_stats(g);
        CHECK(h.total() == 0);
        CHECK(h.derivative_sign_flips == 0);
        CHECK(h.mean_step() == 0.0);
        CHECK(terracing_stats(VoxelGrid({4, 4, 4})).total() == 0);
    }

    TEST_CASE("unit staircase has only unit steps") {
        PhantomParams p;
        p.base = 1;
        p.step = 1;
        const auto g = make_phantom(PhantomKind::staircase, {8, 1, 12}, p);
        const auto h = terracing_stats(g);
        CHECK(h.total() > 0);
        CHECK(h.combined().size() == 1);
        CHECK(h.combined().begin()->first == 1);
        CHECK(h.derivative_sign_flips == 0);
        CHECK(h.mean_step() == 1.0);
        // Along z: heights 1..8 over 8 columns give 7 steps.
        CHECK(h.counts[2].at(1) == 7);
    }

    TEST_CASE("alternating staircase flips at every column") {
        PhantomParams p;
        p.base = 1;
        p.step = 2;
        p.alternating = true;
        const std::int64_t nx = 10;
        const auto g = make_phantom(PhantomKind::staircase, {nx, 1, 8}, p);
        const auto h = terracing_stats(g);
        CHECK(h.combined().size() == 1);
        CHECK(h.combined().begin()->first == 2);
        CHECK(h.counts[2].at(2) == nx - 1);
        CHECK(h.derivative_sign_flips == nx - 2);
        CHECK(h.mean_step() == 2.0);
    }

    TEST_CASE("histogram accessors") {
        StepHistogram h;
        h.counts[0][1] = 3;
        h.counts[1][2] = 1;
        h.counts[2][1] = 1;
        CHECK(h.total() == 5);
        CHECK(h.mean_step() == doctest::Approx(6.0 / 5.0));
        CHECK(h.combined() == std::map<int, std::int64_t>{{1, 4}, {2, 1}});
    }

    TEST_CASE("a sphere is rougher than a plane") {
        const auto h = terracing_stats(solid_sphere(24, 9.0));
        CHECK(h.total() > 0);
        CHECK(h.mean_step() >= 1.0);
    }
}
