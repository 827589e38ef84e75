#include "voxsynth/volume_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "voxsynth/error.hpp"

namespace voxsynth {

namespace fs = std::filesystem;

namespace {

enum class ElementType { u8, i8, f32, f64, bit };

std::size_t element_bytes(ElementType t) {
    switch (t) {
        case ElementType::u8:
        case ElementType::i8: return 1;
        case ElementType::f32: return 4;
        case ElementType::f64: return 8;
        case ElementType::bit: return 0;
    }
    return 0;
}

std::string os_cause() { return std::strerror(errno); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "': " + os_cause());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for '" + path.string() + "': " + os_cause());
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing: " + os_cause());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "': " + os_cause());
}

std::string gunzip(const std::string& in, const fs::path& path) {
    z_stream zs{};
    // 15 + 32: auto-detect zlib or gzip wrapper.
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw IoError("zlib init failed for '" + path.string() + "'");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    std::string out;
    char buf[1 << 16];
    int ret = Z_OK;
    while (ret != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw IoError("gzip payload of '" + path.string() + "' is corrupt");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
        if (ret == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw IoError("gzip payload of '" + path.string() + "' is truncated");
        }
    }
    inflateEnd(&zs);
    return out;
}

std::string gzip(const std::string& in) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw IoError("zlib deflate init failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    std::string out;
    char buf[1 << 16];
    int ret = Z_OK;
    while (ret != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = deflate(&zs, Z_FINISH);
        if (ret == Z_STREAM_ERROR) {
            deflateEnd(&zs);
            throw IoError("gzip compression failed");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    }
    deflateEnd(&zs);
    return out;
}

/// Decodes an element payload into a grid, thresholding as documented.
VoxelGrid decode_payload(const std::string& payload, ElementType type, Dims dims, Spacing spacing,
                         bool big_endian, const fs::path& path) {
    VoxelGrid grid(dims, spacing);
    const std::int64_t n = grid.size();
    const std::size_t expected = type == ElementType::bit ? static_cast<std::size_t>((n + 7) / 8)
                                                          : static_cast<std::size_t>(n) * element_bytes(type);
    if (payload.size() != expected) {
        throw ValidationError("payload of '" + path.string() + "' has " + std::to_string(payload.size()) +
                              " bytes, header implies " + std::to_string(expected));
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
    std::int64_t nan_count = 0;
    auto load_swapped = [&](std::int64_t i, std::size_t width, unsigned char* dst) {
        std::memcpy(dst, bytes + i * static_cast<std::int64_t>(width), width);
        if (big_endian) std::reverse(dst, dst + width);
    };
    for (std::int64_t i = 0; i < n; ++i) {
        bool on = false;
        switch (type) {
            case ElementType::u8:
            case ElementType::i8: on = bytes[i] != 0; break;
            case ElementType::bit: on = (bytes[i >> 3] >> (i & 7)) & 1u; break;
            case ElementType::f32: {
                float v;
                load_swapped(i, 4, reinterpret_cast<unsigned char*>(&v));
                if (std::isnan(v)) ++nan_count;
                on = v >= 0.5f;
                break;
            }
            case ElementType::f64: {
                double v;
                load_swapped(i, 8, reinterpret_cast<unsigned char*>(&v));
                if (std::isnan(v)) ++nan_count;
                on = v >= 0.5;
                break;
            }
        }
        if (on) grid.set(i, true);
    }
    if (nan_count > 0) {
        throw ValidationError("'" + path.string() + "' is not a binary mask: " + std::to_string(nan_count) +
                              " voxels are NaN");
    }
    return grid;
}

ElementType parse_type(std::string t, const fs::path& path) {
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "uint8" || t == "uchar" || t == "unsigned char" || t == "uint8_t") return ElementType::u8;
    if (t == "int8" || t == "signed char" || t == "int8_t") return ElementType::i8;
    if (t == "float") return ElementType::f32;
    if (t == "double") return ElementType::f64;
    if (t == "bit") return ElementType::bit;
    throw ValidationError("'" + path.string() + "': unsupported element type '" + t + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::int64_t parse_positive(const std::string& token, const fs::path& path) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(token, &used);
    } catch (const std::exception&) {
        throw ValidationError("'" + path.string() + "': bad size '" + token + "'");
    }
    if (used != token.size() || v < 1) throw ValidationError("'" + path.string() + "': bad size '" + token + "'");
    return v;
}

/// Parses "(a,b,c) (d,e,f) (g,h,i)"; only diagonal matrices are accepted.
Spacing parse_space_directions(const std::string& value, const fs::path& path) {
    std::vector<std::array<double, 3>> vecs;
    std::size_t pos = 0;
    while ((pos = value.find('(', pos)) != std::string::npos) {
        const auto close = value.find(')', pos);
        if (close == std::string::npos) break;
        std::string inner = value.substr(pos + 1, close - pos - 1);
        std::replace(inner.begin(), inner.end(), ',', ' ');
        std::istringstream ss(inner);
        std::array<double, 3> v{};
        if (!(ss >> v[0] >> v[1] >> v[2])) {
            throw ValidationError("'" + path.string() + "': malformed space directions");
        }
        vecs.push_back(v);
        pos = close + 1;
    }
    if (vecs.size() != 3) throw ValidationError("'" + path.string() + "': space directions must list 3 vectors");
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i != j && vecs[i][j] != 0.0) {
                throw ValidationError("'" + path.string() + "': only diagonal space directions are supported");
            }
        }
    }
    return Spacing{std::abs(vecs[0][0]), std::abs(vecs[1][1]), std::abs(vecs[2][2])};
}

VoxelGrid load_nrrd(const fs::path& path) {
    const std::string file = read_file(path);
    std::size_t pos = 0;
    auto next_line = [&](std::string& line) {
        if (pos >= file.size()) return false;
        auto nl = file.find('\n', pos);
        if (nl == std::string::npos) nl = file.size();
        line = file.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = std::min(nl + 1, file.size() + 1);
        return true;
    };
    std::string line;
    if (!next_line(line) || line.rfind("NRRD000", 0) != 0) {
        throw ValidationError("'" + path.string() + "' is not a NRRD file (missing magic)");
    }
    std::map<std::string, std::string> fields;
    bool header_done = false;
    while (next_line(line)) {
        if (line.empty()) {
            header_done = true;
            break;
        }
        if (line[0] == '#') continue;
        if (line.find(":=") != std::string::npos) continue;  // key/value pairs carry no geometry
        const auto colon = line.find(": ");
        if (colon == std::string::npos) throw ValidationError("'" + path.string() + "': malformed header line '" + line + "'");
        std::string key = line.substr(0, colon);
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        fields[key] = trim(line.substr(colon + 2));
    }
    auto require = [&](const char* key) -> const std::string& {
        auto it = fields.find(key);
        if (it == fields.end()) throw ValidationError("'" + path.string() + "': header lacks '" + key + "'");
        return it->second;
    };
    if (require("dimension") != "3") throw ValidationError("'" + path.string() + "': dimension must be 3");
    const ElementType type = parse_type(require("type"), path);
    if (type == ElementType::bit) throw ValidationError("'" + path.string() + "': NRRD has no bit type");

    std::istringstream sizes(require("sizes"));
    std::string tok;
    std::vector<std::int64_t> dims;
    while (sizes >> tok) dims.push_back(parse_positive(tok, path));
    if (dims.size() != 3) throw ValidationError("'" + path.string() + "': sizes must list 3 values");

    Spacing spacing;
    if (auto it = fields.find("space directions"); it != fields.end()) {
        spacing = parse_space_directions(it->second, path);
    } else if (auto sp = fields.find("spacings"); sp != fields.end()) {
        std::istringstream ss(sp->second);
        if (!(ss >> spacing.sx >> spacing.sy >> spacing.sz)) {
            throw ValidationError("'" + path.string() + "': malformed spacings");
        }
    }

    std::string encoding = "raw";
    if (auto it = fields.find("encoding"); it != fields.end()) encoding = it->second;
    bool big_endian = false;
    if (auto it = fields.find("endian"); it != fields.end()) big_endian = it->second == "big";

    std::string payload;
    auto data_file = fields.find("data file");
    if (data_file == fields.end()) data_file = fields.find("datafile");
    if (data_file != fields.end()) {
        fs::path data_path = data_file->second;
        if (data_path.is_relative()) data_path = path.parent_path() / data_path;
        payload = read_file(data_path);
    } else {
        if (!header_done) throw ValidationError("'" + path.string() + "': header not terminated by a blank line");
        payload = pos <= file.size() ? file.substr(pos) : std::string{};
    }

    if (encoding == "gzip" || encoding == "gz") {
        payload = gunzip(payload, path);
    } else if (encoding != "raw") {
        throw ValidationError("'" + path.string() + "': unsupported encoding '" + encoding + "'");
    }
    return decode_payload(payload, type, Dims{dims[0], dims[1], dims[2]}, spacing, big_endian, path);
}

std::string to_bytes(const VoxelGrid& grid) {
    std::string bytes(static_cast<std::size_t>(grid.size()), '\0');
    grid.for_each_set([&](std::int64_t i) { bytes[static_cast<std::size_t>(i)] = 1; });
    return bytes;
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

void save_nrrd(const VoxelGrid& grid, const fs::path& path, NrrdEncoding encoding) {
    const Dims& d = grid.dims();
    const Spacing& s = grid.spacing();
    const bool detached = path.extension() == ".nhdr";
    const bool gz = encoding == NrrdEncoding::gzip;
    std::ostringstream h;
    h << "NRRD0004\n"
      << "# written by voxsynth\n"
      << "type: uint8\n"
      << "dimension: 3\n"
      << "space: left-posterior-superior\n"
      << "sizes: " << d.nx << ' ' << d.ny << ' ' << d.nz << '\n'
      << "space directions: (" << format_double(s.sx) << ",0,0) (0," << format_double(s.sy) << ",0) (0,0,"
      << format_double(s.sz) << ")\n"
      << "kinds: domain domain domain\n"
      << "encoding: " << (gz ? "gzip" : "raw") << '\n'
      << "space origin: (0,0,0)\n";
    std::string payload = to_bytes(grid);
    if (gz) payload = gzip(payload);
    if (detached) {
        fs::path data = path;
        data.replace_extension(gz ? ".raw.gz" : ".raw");
        h << "data file: " << data.filename().string() << '\n';
        write_file(data, payload);
        write_file(path, h.str());
    } else {
        h << '\n';
        write_file(path, h.str() + payload);
    }
}

std::pair<fs::path, fs::path> raw_json_paths(const fs::path& path) {
    fs::path raw = path;
    fs::path json = path;
    if (path.extension() == ".json") {
        raw.replace_extension(".raw");
    } else {
        json.replace_extension(".json");
    }
    return {raw, json};
}

VoxelGrid load_raw_json(const fs::path& path) {
    const auto [raw_path, json_path] = raw_json_paths(path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(json_path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed sidecar '" + json_path.string() + "': " + e.what());
    }
    try {
        const auto dims = meta.at("dims").get<std::vector<std::int64_t>>();
        if (dims.size() != 3) throw ValidationError("'" + json_path.string() + "': dims must have 3 entries");
        for (auto v : dims) {
            if (v < 1) throw ValidationError("'" + json_path.string() + "': dims must be >= 1");
        }
        Spacing spacing;
        if (meta.contains("spacing")) {
            const auto sp = meta.at("spacing").get<std::vector<double>>();
            if (sp.size() != 3) throw ValidationError("'" + json_path.string() + "': spacing must have 3 entries");
            spacing = Spacing{sp[0], sp[1], sp[2]};
        }
        const ElementType type = parse_type(meta.value("type", std::string("uint8")), json_path);
        return decode_payload(read_file(raw_path), type, Dims{dims[0], dims[1], dims[2]}, spacing, false, raw_path);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed sidecar '" + json_path.string() + "': " + e.what());
    }
}

void save_raw_json(const VoxelGrid& grid, const fs::path& path) {
    const auto [raw_path, json_path] = raw_json_paths(path);
    const Dims& d = grid.dims();
    const Spacing& s = grid.spacing();
    nlohmann::ordered_json meta;
    meta["dims"] = {d.nx, d.ny, d.nz};
    meta["spacing"] = {s.sx, s.sy, s.sz};
    meta["type"] = "uint8";
    write_file(raw_path, to_bytes(grid));
    write_file(json_path, meta.dump(2) + "\n");
}

}  // namespace

VolumeFormat format_from_path(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".nrrd" || ext == ".nhdr") return VolumeFormat::nrrd;
    if (ext == ".raw" || ext == ".json") return VolumeFormat::raw_json;
    throw ValidationError("cannot infer volume format from '" + path.string() + "' (use .nrrd, .nhdr, .raw or .json)");
}

VoxelGrid load_volume(const fs::path& path, VolumeFormat format) {
    return format == VolumeFormat::nrrd ? load_nrrd(path) : load_raw_json(path);
}

VoxelGrid load_volume(const fs::path& path) { return load_volume(path, format_from_path(path)); }

void save_volume(const VoxelGrid& grid, const fs::path& path, VolumeFormat format, NrrdEncoding encoding) {
    if (format == VolumeFormat::nrrd) {
        save_nrrd(grid, path, encoding);
    } else {
        save_raw_json(grid, path);
    }
}

void save_volume(const VoxelGrid& grid, const fs::path& path) { save_volume(grid, path, format_from_path(path)); }

}  // namespace voxsynth
