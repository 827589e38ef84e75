#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "voxsynth/voxel_grid.hpp"

namespace voxsynth {

/// 2|A∩B| / (|A|+|B|); 1.0 when both grids are empty.
double dsc(const VoxelGrid& a, const VoxelGrid& b);

/// Squared Euclidean distance (mm²) from every voxel to the nearest occupied
/// voxel, honoring anisotropic spacing. Exact separable lower-envelope
/// transform. Throws if the grid is empty.
std::vector<double> squared_distance_transform(const VoxelGrid& grid);

/// Symmetric Hausdorff distance in mm between occupied-voxel point sets.
/// percentile 100 is the classical maximum; 95 takes the larger of the two
/// directed 95th percentiles (linear interpolation between order
/// statistics). Throws ValidationError if either grid is empty.
double hausdorff(const VoxelGrid& a, const VoxelGrid& b, int percentile = 100);

struct HausdorffPair {
    double hd_mm = 0.0;
    double hd95_mm = 0.0;
};
/// Both variants from one pair of distance transforms.
HausdorffPair hausdorff_both(const VoxelGrid& a, const VoxelGrid& b);

/// Outcome of one pipeline run. Timings are kept out of the stable JSON so
/// reports from equal inputs and seeds compare byte for byte.
struct MetricReport {
    double dsc = 0.0;
    std::optional<double> hd_mm;    ///< absent when either volume is empty
    std::optional<double> hd95_mm;
    std::map<std::string, double> runtime_s;
    std::optional<double> hit_rate;  ///< lowest per-level hit rate (hash backend)
    std::uint64_t bytes_index = 0;
    std::uint64_t bytes_features = 0;
    nlohmann::json levels = nlohmann::json::array();
    nlohmann::json details = nlohmann::json::object();

    /// Sorted-key JSON. With include_timing, adds runtime_s.
    nlohmann::json to_json(bool include_timing = false) const;
};

/// Per-case values plus their means, for a batch of reports.
nlohmann::json summarize_reports(const std::vector<MetricReport>& reports);

}  // namespace voxsynth
