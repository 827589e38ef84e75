#include "voxsynth/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "voxsynth/error.hpp"

namespace voxsynth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dims(const VoxelGrid& a, const VoxelGrid& b, const char* what) {
    if (!(a.dims() == b.dims())) throw ValidationError(std::string(what) + ": dims mismatch");
}

/// Lower envelope of parabolas (s·(p - q))² + f[q] over the finite sites of
/// one line; writes the minimum for every p back into f.
void envelope_1d(double* f, std::int64_t n, std::int64_t stride, double s, std::vector<double>& work,
                 std::vector<std::int64_t>& sites, std::vector<double>& bounds) {
    work.resize(static_cast<std::size_t>(n));
    sites.resize(static_cast<std::size_t>(n));
    bounds.resize(static_cast<std::size_t>(n) + 1);
    for (std::int64_t i = 0; i < n; ++i) work[i] = f[i * stride];
    std::int64_t k = -1;
    for (std::int64_t q = 0; q < n; ++q) {
        if (work[q] == kInf) continue;
        const double xq = static_cast<double>(q) * s;
        double cut = -kInf;
        while (k >= 0) {
            const double xv = static_cast<double>(sites[k]) * s;
            cut = ((work[q] + xq * xq) - (work[sites[k]] + xv * xv)) / (2.0 * (xq - xv));
            if (cut <= bounds[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        sites[k] = q;
        bounds[k] = k == 0 ? -kInf : cut;
        bounds[k + 1] = kInf;
    }
    if (k < 0) {
        for (std::int64_t i = 0; i < n; ++i) f[i * stride] = kInf;
        return;
    }
    std::int64_t j = 0;
    for (std::int64_t p = 0; p < n; ++p) {
        const double xp = static_cast<double>(p) * s;
        while (bounds[j + 1] < xp) ++j;
        const double dx = xp - static_cast<double>(sites[j]) * s;
        f[p * stride] = dx * dx + work[sites[j]];
    }
}

std::vector<double> directed_distances(const VoxelGrid& from, const std::vector<double>& dt_to) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(from.count()));
    from.for_each_set([&](std::int64_t idx) { out.push_back(std::sqrt(dt_to[static_cast<std::size_t>(idx)])); });
    return out;
}

double percentile_of(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

double dsc(const VoxelGrid& a, const VoxelGrid& b) {
    require_same_dims(a, b, "dsc");
    const std::int64_t na = a.count();
    const std::int64_t nb = b.count();
    if (na + nb == 0) return 1.0;
    std::int64_t both = 0;
    const auto& wa = a.words();
    const auto& wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) both += std::popcount(wa[i] & wb[i]);
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

std::vector<double> squared_distance_transform(const VoxelGrid& grid) {
    if (grid.empty()) throw ValidationError("distance transform of an empty grid is undefined");
    const Dims& d = grid.dims();
    const Spacing& sp = grid.spacing();
    std::vector<double> f(static_cast<std::size_t>(d.voxels()), kInf);
    grid.for_each_set([&](std::int64_t idx) { f[static_cast<std::size_t>(idx)] = 0.0; });
    std::vector<double> work;
    std::vector<std::int64_t> sites;
    std::vector<double> bounds;
    const std::int64_t sx = 1;
    const std::int64_t sy = d.nx;
    const std::int64_t sz = d.nx * d.ny;
    for (std::int64_t z = 0; z < d.nz; ++z) {
        for (std::int64_t y = 0; y < d.ny; ++y) envelope_1d(&f[z * sz + y * sy], d.nx, sx, sp.sx, work, sites, bounds);
    }
    for (std::int64_t z = 0; z < d.nz; ++z) {
        for (std::int64_t x = 0; x < d.nx; ++x) envelope_1d(&f[z * sz + x], d.ny, sy, sp.sy, work, sites, bounds);
    }
    for (std::int64_t y = 0; y < d.ny; ++y) {
        for (std::int64_t x = 0; x < d.nx; ++x) envelope_1d(&f[y * sy + x], d.nz, sz, sp.sz, work, sites, bounds);
    }
    return f;
}

HausdorffPair hausdorff_both(const VoxelGrid& a, const VoxelGrid& b) {
    require_same_dims(a, b, "hausdorff");
    if (!(a.spacing() == b.spacing())) throw ValidationError("hausdorff: spacing mismatch");
    if (a.empty() || b.empty()) throw ValidationError("hausdorff distance is undefined for an empty volume");
    const auto ab = directed_distances(a, squared_distance_transform(b));
    const auto ba = directed_distances(b, squared_distance_transform(a));
    HausdorffPair out;
    out.hd_mm = std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
    out.hd95_mm = std::max(percentile_of(ab, 95.0), percentile_of(ba, 95.0));
    return out;
}

double hausdorff(const VoxelGrid& a, const VoxelGrid& b, int percentile) {
    if (percentile != 100 && percentile != 95) throw ValidationError("hausdorff percentile must be 100 or 95");
    const auto both = hausdorff_both(a, b);
    return percentile == 100 ? both.hd_mm : both.hd95_mm;
}

nlohmann::json MetricReport::to_json(bool include_timing) const {
    nlohmann::json j = nlohmann::json::object();
    j["dsc"] = dsc;
    j["hd_mm"] = hd_mm ? nlohmann::json(*hd_mm) : nlohmann::json(nullptr);
    j["hd95_mm"] = hd95_mm ? nlohmann::json(*hd95_mm) : nlohmann::json(nullptr);
    j["hit_rate"] = hit_rate ? nlohmann::json(*hit_rate) : nlohmann::json(nullptr);
    j["bytes_index"] = bytes_index;
    j["bytes_features"] = bytes_features;
    j["levels"] = levels;
    j["details"] = details;
    if (include_timing) j["runtime_s"] = runtime_s;
    return j;
}

nlohmann::json summarize_reports(const std::vector<MetricReport>& reports) {
    nlohmann::json cases = nlohmann::json::array();
    double dsc_sum = 0.0;
    double hd_sum = 0.0;
    double hd95_sum = 0.0;
    std::size_t hd_n = 0;
    for (const auto& r : reports) {
        cases.push_back({{"dsc", r.dsc},
                         {"hd_mm", r.hd_mm ? nlohmann::json(*r.hd_mm) : nlohmann::json(nullptr)},
                         {"hd95_mm", r.hd95_mm ? nlohmann::json(*r.hd95_mm) : nlohmann::json(nullptr)}});
        dsc_sum += r.dsc;
        if (r.hd_mm && r.hd95_mm) {
            hd_sum += *r.hd_mm;
            hd95_sum += *r.hd95_mm;
            ++hd_n;
        }
    }
    nlohmann::json out;
    out["cases"] = cases;
    out["mean_dsc"] = reports.empty() ? nlohmann::json(nullptr) : nlohmann::json(dsc_sum / reports.size());
    out["mean_hd_mm"] = hd_n == 0 ? nlohmann::json(nullptr) : nlohmann::json(hd_sum / hd_n);
    out["mean_hd95_mm"] = hd_n == 0 ? nlohmann::json(nullptr) : nlohmann::json(hd95_sum / hd_n);
    out["hd_cases"] = hd_n;
    return out;
}

}  // namespace voxsynth
