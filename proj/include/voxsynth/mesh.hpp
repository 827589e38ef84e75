#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

/// Indexed triangle surface in millimetres. Triangles wind counter-clockwise
/// seen from outside the enclosed object.
struct Mesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    bool empty() const { return triangles.empty(); }
    bool operator==(const Mesh&) const = default;
};

double surface_area(const Mesh& mesh);
/// Divergence-theorem volume; positive for outward-facing closed meshes.
double signed_volume(const Mesh& mesh);
/// True when every undirected edge is used by exactly two triangles.
bool is_watertight(const Mesh& mesh);
/// True when every directed edge appears once and its reverse once.
bool is_consistently_oriented(const Mesh& mesh);

/// Marching cubes on a binary grid at iso 0.5. The grid is treated as
/// surrounded by a one-voxel zero border so boundary-touching objects close.
/// Vertices sit at edge midpoints and are numbered by global edge id.
Mesh marching_cubes(const VoxelGrid& grid);

/// Triangles (as cube-edge indices) for each of the 256 corner cases. Corner
/// k of a cube is at offset (k & 1, (k >> 1) & 1, (k >> 2) & 1); bit k of the
/// case index is set when that corner is occupied.
const std::array<std::vector<std::array<std::uint8_t, 3>>, 256>& marching_cubes_table();

enum class MeshFormat { stl_binary, obj };

MeshFormat mesh_format_from_path(const std::filesystem::path& path);

/// STL stores per-triangle normals recomputed from the winding; OBJ stores
/// shared vertices with 1-based face indices.
void export_mesh(const Mesh& mesh, const std::filesystem::path& path, MeshFormat format);
void export_mesh(const Mesh& mesh, const std::filesystem::path& path);

/// OBJ reader for `v` and `f` records (the subset export_mesh writes).
Mesh read_obj(const std::filesystem::path& path);

struct StlTriangle {
    std::array<float, 3> normal;
    std::array<std::array<float, 3>, 3> vertices;
};
/// Binary STL reader; returns the triangle soup.
std::vector<StlTriangle> read_stl(const std::filesystem::path& path);

}  // namespace voxsynth
