#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "voxsynth/metrics.hpp"
#include "voxsynth/morphology.hpp"
#include "voxsynth/synthesis_config.hpp"

namespace voxsynth {

enum class Backend { hash, kdtree };

Backend parse_backend(const std::string& s);
std::string to_string(Backend b);

struct PipelineConfig {
    Backend backend = Backend::hash;
    SynthesisConfig synth;
    /// PCA dimensions for the kd-tree backend.
    int kd_dims = 20;
    /// When the input has the template's resolution, downsample it 2^levels
    /// times first, standing in for a coarse network output.
    bool simulate_coarse = true;
    /// Implant extraction: output = denoise(completed AND NOT defective).
    std::optional<std::filesystem::path> defective;
    KeepPolicy keep = KeepPolicy::largest();
    int morph_radius = 1;
    /// Ground truth for the metrics; defaults to the template.
    std::optional<std::filesystem::path> reference;

    void validate() const;
};

/// Numeric defaults and options as JSON, and back. Unknown keys are rejected
/// so typos in config files surface as validation errors.
nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Thrown when a pipeline stage fails; what() names the stage. The original
/// error category is kept in `category` (validation, io or internal).
class StageError : public std::runtime_error {
public:
    enum class Category { validation, io, internal };
    StageError(std::string stage, Category category, const std::string& message);
    const std::string& stage() const { return stage_; }
    Category category() const { return category_; }

private:
    std::string stage_;
    Category category_;
};

/// Load → (simulate coarse) → hierarchical synthesis → (implant extraction)
/// → marching cubes → export. Writes volume.nrrd, mesh.stl and report.json
/// (plus completed.nrrd for implant runs and timing.json) into `out_dir`.
/// On failure every file written so far is removed.
MetricReport run_pipeline(const std::filesystem::path& input, const std::filesystem::path& template_path,
                          const PipelineConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace voxsynth
