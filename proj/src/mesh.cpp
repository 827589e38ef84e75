#include "voxsynth/mesh.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "voxsynth/error.hpp"

namespace voxsynth {

namespace fs = std::filesystem;

namespace {

using V3 = std::array<double, 3>;

V3 sub(const V3& a, const V3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
V3 cross(const V3& a, const V3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
}

float get_f32(const char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "': " + std::strerror(errno));
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

double surface_area(const Mesh& mesh) {
    double area = 0.0;
    for (const auto& t : mesh.triangles) {
        const V3 n = cross(sub(mesh.vertices[t[1]], mesh.vertices[t[0]]), sub(mesh.vertices[t[2]], mesh.vertices[t[0]]));
        area += 0.5 * std::sqrt(dot(n, n));
    }
    return area;
}

double signed_volume(const Mesh& mesh) {
    double vol = 0.0;
    for (const auto& t : mesh.triangles) {
        vol += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]])) / 6.0;
    }
    return vol;
}

bool is_watertight(const Mesh& mesh) {
    std::unordered_map<std::uint64_t, int> count;
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) {
            const auto a = t[i];
            const auto b = t[(i + 1) % 3];
            ++count[edge_key(std::min(a, b), std::max(a, b))];
        }
    }
    return std::all_of(count.begin(), count.end(), [](const auto& kv) { return kv.second == 2; });
}

bool is_consistently_oriented(const Mesh& mesh) {
    std::unordered_map<std::uint64_t, int> directed;
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) ++directed[edge_key(t[i], t[(i + 1) % 3])];
    }
    for (const auto& [key, n] : directed) {
        if (n != 1) return false;
        const auto a = static_cast<std::uint32_t>(key >> 32);
        const auto b = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
        if (!directed.contains(edge_key(b, a))) return false;
    }
    return true;
}

MeshFormat mesh_format_from_path(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".stl") return MeshFormat::stl_binary;
    if (ext == ".obj") return MeshFormat::obj;
    throw ValidationError("cannot infer mesh format from '" + path.string() + "' (use .stl or .obj)");
}

void export_mesh(const Mesh& mesh, const fs::path& path, MeshFormat format) {
    if (format == MeshFormat::stl_binary) {
        std::string out;
        out.reserve(84 + mesh.triangles.size() * 50);
        std::string header = "voxsynth binary STL";
        header.resize(80, ' ');
        out += header;
        put_u32(out, static_cast<std::uint32_t>(mesh.triangles.size()));
        for (const auto& t : mesh.triangles) {
            V3 n = cross(sub(mesh.vertices[t[1]], mesh.vertices[t[0]]), sub(mesh.vertices[t[2]], mesh.vertices[t[0]]));
            const double len = std::sqrt(dot(n, n));
            if (len > 0.0) n = {n[0] / len, n[1] / len, n[2] / len};
            for (double c : n) put_f32(out, static_cast<float>(c));
            for (int i = 0; i < 3; ++i) {
                for (double c : mesh.vertices[t[i]]) put_f32(out, static_cast<float>(c));
            }
            out.push_back('\0');
            out.push_back('\0');
        }
        write_bytes(path, out);
        return;
    }
    std::ostringstream os;
    os.precision(17);
    os << "# voxsynth\n";
    for (const auto& v : mesh.vertices) os << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    write_bytes(path, os.str());
}

void export_mesh(const Mesh& mesh, const fs::path& path) { export_mesh(mesh, path, mesh_format_from_path(path)); }

Mesh read_obj(const fs::path& path) {
    std::istringstream in(read_bytes(path));
    Mesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            std::array<double, 3> v{};
            if (!(ls >> v[0] >> v[1] >> v[2])) throw ValidationError("'" + path.string() + "': bad vertex line");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::array<std::uint32_t, 3> t{};
            for (auto& idx : t) {
                std::string tok;
                if (!(ls >> tok)) throw ValidationError("'" + path.string() + "': only triangles are supported");
                const long v = std::stol(tok.substr(0, tok.find('/')));
                if (v < 1 || static_cast<std::size_t>(v) > mesh.vertices.size()) {
                    throw ValidationError("'" + path.string() + "': face index out of range");
                }
                idx = static_cast<std::uint32_t>(v - 1);
            }
            mesh.triangles.push_back(t);
        }
    }
    return mesh;
}

std::vector<StlTriangle> read_stl(const fs::path& path) {
    const std::string bytes = read_bytes(path);
    if (bytes.size() < 84) throw ValidationError("'" + path.string() + "': too short for binary STL");
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[80 + i])) << (8 * i);
    if (bytes.size() != 84 + static_cast<std::size_t>(n) * 50) {
        throw ValidationError("'" + path.string() + "': size does not match triangle count");
    }
    std::vector<StlTriangle> tris(n);
    for (std::uint32_t t = 0; t < n; ++t) {
        const char* p = bytes.data() + 84 + static_cast<std::size_t>(t) * 50;
        for (int i = 0; i < 3; ++i) tris[t].normal[i] = get_f32(p + 4 * i);
        for (int v = 0; v < 3; ++v) {
            for (int i = 0; i < 3; ++i) tris[t].vertices[v][i] = get_f32(p + 12 + 12 * v + 4 * i);
        }
    }
    return tris;
}

}  // namespace voxsynth
