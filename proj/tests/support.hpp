#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "voxsynth/voxel_grid.hpp"

namespace testing_support {

/// Seeded grid with each voxel set with probability `p`.
inline voxsynth::VoxelGrid random_grid(voxsynth::Dims dims, double p, std::uint64_t seed,
                                       voxsynth::Spacing spacing = {}) {
    voxsynth::VoxelGrid g(dims, spacing);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::int64_t i = 0; i < g.size(); ++i) g.set(i, u(rng) < p);
    return g;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("voxsynth_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
