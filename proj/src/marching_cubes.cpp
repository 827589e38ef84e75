#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <utility>

#include "voxsynth/mesh.hpp"

namespace voxsynth {

namespace {

using Vec3i = std::array<int, 3>;

Vec3i corner_offset(int k) { return {k & 1, (k >> 1) & 1, (k >> 2) & 1}; }

struct CubeTopology {
    std::array<std::array<int, 2>, 12> edges{};  // corner pairs, low corner first
    std::array<int, 12> edge_axis{};
    std::array<std::array<int, 4>, 6> face_corners{};  // counter-clockwise seen from outside
    std::array<std::array<int, 2>, 12> edge_faces{};

    CubeTopology() {
        int e = 0;
        for (int axis = 0; axis < 3; ++axis) {
            for (int k = 0; k < 8; ++k) {
                if ((k >> axis) & 1) continue;
                edges[e] = {k, k | (1 << axis)};
                edge_axis[e] = axis;
                ++e;
            }
        }
        int f = 0;
        for (int axis = 0; axis < 3; ++axis) {
            const int u = (axis + 1) % 3;
            const int v = (axis + 2) % 3;
            for (int side = 0; side < 2; ++side) {
                // (u, v) walks (0,0) (1,0) (1,1) (0,1); e_u x e_v = +e_axis for the cyclic (axis, u, v).
                std::array<int, 4> ring{};
                const int uv[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
                for (int i = 0; i < 4; ++i) {
                    ring[i] = (side << axis) | (uv[i][0] << u) | (uv[i][1] << v);
                }
                if (side == 0) std::reverse(ring.begin(), ring.end());
                face_corners[f++] = ring;
            }
        }
        for (int ei = 0; ei < 12; ++ei) {
            int found = 0;
            for (int fi = 0; fi < 6; ++fi) {
                const auto& ring = face_corners[fi];
                const bool has_a = std::find(ring.begin(), ring.end(), edges[ei][0]) != ring.end();
                const bool has_b = std::find(ring.begin(), ring.end(), edges[ei][1]) != ring.end();
                if (has_a && has_b) edge_faces[ei][found++] = fi;
            }
        }
    }

    int edge_between(int a, int b) const {
        if (a > b) std::swap(a, b);
        for (int e = 0; e < 12; ++e) {
            if (edges[e][0] == a && edges[e][1] == b) return e;
        }
        return -1;
    }

    bool share_face(int e1, int e2) const {
        for (int f1 : edge_faces[e1]) {
            for (int f2 : edge_faces[e2]) {
                if (f1 == f2) return true;
            }
        }
        return false;
    }
};

const CubeTopology& topology() {
    static const CubeTopology t;
    return t;
}

/// Fan-triangulates a loop from the apex whose diagonals avoid lying in a
/// cube face, so no diagonal can coincide with an edge of the neighbor cube.
void triangulate_loop(const std::vector<int>& loop, std::vector<std::array<std::uint8_t, 3>>& out) {
    const auto& topo = topology();
    const int m = static_cast<int>(loop.size());
    int apex = 0;
    for (int s = 0; s < m; ++s) {
        bool ok = true;
        for (int k = 2; k < m - 1 && ok; ++k) {
            ok = !topo.share_face(loop[s], loop[(s + k) % m]);
        }
        if (ok) {
            apex = s;
            break;
        }
    }
    for (int k = 1; k + 1 < m; ++k) {
        out.push_back({static_cast<std::uint8_t>(loop[apex]), static_cast<std::uint8_t>(loop[(apex + k) % m]),
                       static_cast<std::uint8_t>(loop[(apex + k + 1) % m])});
    }
}

std::array<std::vector<std::array<std::uint8_t, 3>>, 256> generate_table() {
    const auto& topo = topology();
    std::array<std::vector<std::array<std::uint8_t, 3>>, 256> table;
    for (int cube_case = 0; cube_case < 256; ++cube_case) {
        auto inside = [&](int corner) { return (cube_case >> corner) & 1; };
        // On each face, walking the ring, an inside run is entered through one
        // crossing edge and left through the next; that pair is one contour
        // segment. Diagonal inside corners on a face stay separate.
        std::array<int, 12> next;
        next.fill(-1);
        for (const auto& ring : topo.face_corners) {
            for (int i = 0; i < 4; ++i) {
                const int c0 = ring[i];
                const int c1 = ring[(i + 1) % 4];
                if (inside(c0) || !inside(c1)) continue;
                const int enter = topo.edge_between(c0, c1);
                for (int j = 1; j < 4; ++j) {
                    const int a = ring[(i + j) % 4];
                    const int b = ring[(i + j + 1) % 4];
                    if (inside(a) && !inside(b)) {
                        next[enter] = topo.edge_between(a, b);
                        break;
                    }
                }
            }
        }
        std::array<bool, 12> used{};
        for (int start = 0; start < 12; ++start) {
            if (next[start] < 0 || used[start]) continue;
            std::vector<int> loop;
            for (int e = start; !used[e]; e = next[e]) {
                used[e] = true;
                loop.push_back(e);
            }
            triangulate_loop(loop, table[cube_case]);
        }
    }
    return table;
}

}  // namespace

const std::array<std::vector<std::array<std::uint8_t, 3>>, 256>& marching_cubes_table() {
    static const auto table = generate_table();
    return table;
}

Mesh marching_cubes(const VoxelGrid& grid) {
    const auto& topo = topology();
    const auto& table = marching_cubes_table();
    const Dims& d = grid.dims();
    // Cubes are indexed by their low corner in [-1, n - 1]; shifted by one for ids.
    const std::int64_t ex = d.nx + 2;
    const std::int64_t ey = d.ny + 2;
    auto edge_id = [&](std::int64_t x, std::int64_t y, std::int64_t z, int axis) {
        return (((z + 1) * ey + (y + 1)) * ex + (x + 1)) * 3 + axis;
    };

    std::vector<std::array<std::int64_t, 3>> tri_edges;
    for (std::int64_t z = -1; z < d.nz; ++z) {
        for (std::int64_t y = -1; y < d.ny; ++y) {
            for (std::int64_t x = -1; x < d.nx; ++x) {
                int cube_case = 0;
                for (int k = 0; k < 8; ++k) {
                    const Vec3i o = corner_offset(k);
                    if (grid.get_or_zero(x + o[0], y + o[1], z + o[2])) cube_case |= 1 << k;
                }
                if (cube_case == 0 || cube_case == 255) continue;
                for (const auto& tri : table[cube_case]) {
                    std::array<std::int64_t, 3> ids{};
                    for (int i = 0; i < 3; ++i) {
                        const int e = tri[i];
                        const Vec3i o = corner_offset(topo.edges[e][0]);
                        ids[i] = edge_id(x + o[0], y + o[1], z + o[2], topo.edge_axis[e]);
                    }
                    tri_edges.push_back(ids);
                }
            }
        }
    }

    std::vector<std::int64_t> edge_ids;
    edge_ids.reserve(tri_edges.size() * 3);
    for (const auto& t : tri_edges) edge_ids.insert(edge_ids.end(), t.begin(), t.end());
    std::sort(edge_ids.begin(), edge_ids.end());
    edge_ids.erase(std::unique(edge_ids.begin(), edge_ids.end()), edge_ids.end());

    Mesh mesh;
    const Spacing& s = grid.spacing();
    mesh.vertices.reserve(edge_ids.size());
    for (const auto id : edge_ids) {
        const int axis = static_cast<int>(id % 3);
        std::int64_t rest = id / 3;
        const std::int64_t x = rest % ex - 1;
        rest /= ex;
        const std::int64_t y = rest % ey - 1;
        const std::int64_t z = rest / ey - 1;
        std::array<double, 3> p{static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)};
        p[axis] += 0.5;
        mesh.vertices.push_back({p[0] * s.sx, p[1] * s.sy, p[2] * s.sz});
    }
    mesh.triangles.reserve(tri_edges.size());
    for (const auto& t : tri_edges) {
        std::array<std::uint32_t, 3> tri{};
        for (int i = 0; i < 3; ++i) {
            tri[i] = static_cast<std::uint32_t>(std::lower_bound(edge_ids.begin(), edge_ids.end(), t[i]) -
                                                edge_ids.begin());
        }
        mesh.triangles.push_back(tri);
    }
    return mesh;
}

}  // namespace voxsynth
