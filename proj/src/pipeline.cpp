#include "voxsynth/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <set>
#include <vector>

#include "voxsynth/error.hpp"
#include "voxsynth/kdtree_synthesis.hpp"
#include "voxsynth/mesh.hpp"
#include "voxsynth/resample.hpp"
#include "voxsynth/synthesis.hpp"
#include "voxsynth/volume_io.hpp"

namespace voxsynth {

namespace fs = std::filesystem;
using nlohmann::json;

Backend parse_backend(const std::string& s) {
    if (s == "hash") return Backend::hash;
    if (s == "kdtree") return Backend::kdtree;
    throw ValidationError("unknown backend '" + s + "' (hash, kdtree)");
}

std::string to_string(Backend b) { return b == Backend::hash ? "hash" : "kdtree"; }

namespace {

InterpOrder parse_interp(const std::string& s) {
    if (s == "nearest") return InterpOrder::nearest;
    if (s == "trilinear") return InterpOrder::trilinear;
    if (s == "cubic_spline") return InterpOrder::cubic_spline;
    throw ValidationError("unknown interpolation '" + s + "' (nearest, trilinear, cubic_spline)");
}

std::string to_string(InterpOrder o) {
    switch (o) {
        case InterpOrder::nearest: return "nearest";
        case InterpOrder::trilinear: return "trilinear";
        case InterpOrder::cubic_spline: return "cubic_spline";
    }
    return "?";
}

Smoothing parse_smoothing(const std::string& s) {
    if (s == "gaussian") return Smoothing::gaussian;
    if (s == "mean") return Smoothing::mean;
    throw ValidationError("unknown smoothing '" + s + "' (gaussian, mean)");
}

json dims_json(const Dims& d) { return json::array({d.nx, d.ny, d.nz}); }

json level_json(const LevelStats& s) {
    return {{"level", s.level},
            {"dims", dims_json(s.dims)},
            {"keys_actual", s.keys_actual},
            {"keys_neighbor", s.keys_neighbor},
            {"queries", s.queries},
            {"hits_actual", s.hits_actual},
            {"hits_neighbor", s.hits_neighbor},
            {"fallbacks", s.fallbacks},
            {"hit_rate", s.hit_rate()},
            {"max_probes", s.max_probes},
            {"bytes_index", s.bytes_index},
            {"bytes_keys", s.bytes_keys}};
}

json level_json(const KdTreeStats& s, int level) {
    return {{"level", level},
            {"dims", dims_json(s.dims)},
            {"d", s.d},
            {"points", s.points},
            {"active_count", s.active_count},
            {"queries", s.queries},
            {"exact_hits", s.exact_hits},
            {"bytes_features", s.bytes_features},
            {"bytes_tree", s.bytes_tree}};
}

StageError::Category category_of(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const ValidationError&) {
        return StageError::Category::validation;
    } catch (const IoError&) {
        return StageError::Category::io;
    } catch (const StageError& s) {
        return s.category();
    } catch (...) {
        return StageError::Category::internal;
    }
}

/// Runs pipeline stages, timing them and tagging failures with the stage name.
class StageRunner {
public:
    explicit StageRunner(MetricReport& report) : report_(report) {}

    template <typename Fn>
    auto run(const std::string& stage, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record(stage, t0);
            } else {
                auto result = fn();
                record(stage, t0);
                return result;
            }
        } catch (const std::exception& e) {
            throw StageError(stage, category_of(std::current_exception()), e.what());
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
        report_.runtime_s[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    MetricReport& report_;
};

/// Tracks written files so a failed run leaves nothing half-done behind.
class OutputGuard {
public:
    explicit OutputGuard(fs::path dir) : dir_(std::move(dir)) {}
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        for (auto it = written_.rbegin(); it != written_.rend(); ++it) fs::remove(*it, ec);
        if (created_dir_) fs::remove(dir_, ec);  // only succeeds if empty
    }
    void prepare() {
        std::error_code ec;
        if (!fs::exists(dir_, ec)) {
            if (!fs::create_directories(dir_, ec) || ec) {
                throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
            }
            created_dir_ = true;
        } else if (!fs::is_directory(dir_, ec)) {
            throw IoError("output path '" + dir_.string() + "' is not a directory");
        }
    }
    fs::path file(const std::string& name) {
        fs::path p = dir_ / name;
        written_.push_back(p);
        return p;
    }
    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool created_dir_ = false;
    bool committed_ = false;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

StageError::StageError(std::string stage, Category category, const std::string& message)
    : std::runtime_error("stage '" + stage + "': " + message), stage_(std::move(stage)), category_(category) {}

void PipelineConfig::validate() const {
    synth.validate();
    if (backend == Backend::kdtree && (kd_dims < 1 || kd_dims > key_width(synth.nbhd))) {
        throw ValidationError("kd_dims must be in [1, " + std::to_string(key_width(synth.nbhd)) + "]");
    }
    if (morph_radius < 0) throw ValidationError("morph_radius must be >= 0");
    if (keep.mode == KeepPolicy::Mode::min_size && keep.min_size < 1) throw ValidationError("keep min_size must be >= 1");
}

json to_json(const PipelineConfig& cfg) {
    return {{"backend", to_string(cfg.backend)},
            {"nbhd", static_cast<int>(cfg.synth.nbhd)},
            {"radius", cfg.synth.radius},
            {"fallback", to_string(cfg.synth.fallback)},
            {"levels", cfg.synth.levels},
            {"parallel", to_string(cfg.synth.parallel)},
            {"seed", cfg.synth.seed},
            {"level_upsample", to_string(cfg.synth.level_upsample)},
            {"pyramid_smoothing", cfg.synth.pyramid.smoothing == Smoothing::gaussian ? "gaussian" : "mean"},
            {"pyramid_sigma", cfg.synth.pyramid.sigma},
            {"kd_dims", cfg.kd_dims},
            {"simulate_coarse", cfg.simulate_coarse},
            {"keep", cfg.keep.mode == KeepPolicy::Mode::largest_component ? json("largest") : json(cfg.keep.min_size)},
            {"morph_radius", cfg.morph_radius}};
}

PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig cfg) {
    if (!j.is_object()) throw ValidationError("pipeline config must be a JSON object");
    static const std::set<std::string> known = {"backend",        "nbhd",           "radius",
                                                "fallback",       "levels",         "parallel",
                                                "seed",           "level_upsample", "pyramid_smoothing",
                                                "pyramid_sigma",  "kd_dims",        "simulate_coarse",
                                                "keep",           "morph_radius"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ValidationError("unknown config key '" + key + "'");
    }
    try {
        if (j.contains("backend")) cfg.backend = parse_backend(j.at("backend").get<std::string>());
        if (j.contains("nbhd")) cfg.synth.nbhd = neighborhood_from_int(j.at("nbhd").get<int>());
        if (j.contains("radius")) cfg.synth.radius = j.at("radius").get<int>();
        if (j.contains("fallback")) cfg.synth.fallback = parse_fallback(j.at("fallback").get<std::string>());
        if (j.contains("levels")) cfg.synth.levels = j.at("levels").get<int>();
        if (j.contains("parallel")) cfg.synth.parallel = parse_parallel(j.at("parallel").get<std::string>());
        if (j.contains("seed")) cfg.synth.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("level_upsample")) cfg.synth.level_upsample = parse_interp(j.at("level_upsample").get<std::string>());
        if (j.contains("pyramid_smoothing")) {
            cfg.synth.pyramid.smoothing = parse_smoothing(j.at("pyramid_smoothing").get<std::string>());
        }
        if (j.contains("pyramid_sigma")) cfg.synth.pyramid.sigma = j.at("pyramid_sigma").get<double>();
        if (j.contains("kd_dims")) cfg.kd_dims = j.at("kd_dims").get<int>();
        if (j.contains("simulate_coarse")) cfg.simulate_coarse = j.at("simulate_coarse").get<bool>();
        if (j.contains("keep")) {
            const auto& k = j.at("keep");
            if (k.is_string()) {
                if (k.get<std::string>() != "largest") throw ValidationError("keep must be \"largest\" or a minimum size");
                cfg.keep = KeepPolicy::largest();
            } else {
                cfg.keep = KeepPolicy::at_least(k.get<std::int64_t>());
            }
        }
        if (j.contains("morph_radius")) cfg.morph_radius = j.at("morph_radius").get<int>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("'" + path.string() + "': " + e.what());
    }
    return pipeline_config_from_json(j, std::move(base));
}

MetricReport run_pipeline(const fs::path& input, const fs::path& template_path, const PipelineConfig& cfg,
                          const fs::path& out_dir) {
    MetricReport report;
    StageRunner stages(report);
    OutputGuard outputs(out_dir);
    const int levels = cfg.synth.levels;
    const std::int64_t scale = std::int64_t{1} << std::min(levels, 20);

    stages.run("config", [&] { cfg.validate(); });
    const VoxelGrid tpl = stages.run("load_template", [&] { return load_volume(template_path); });
    const VoxelGrid in = stages.run("load_input", [&] { return load_volume(input); });
    std::optional<VoxelGrid> defective;
    if (cfg.defective) defective = stages.run("load_defective", [&] { return load_volume(*cfg.defective); });
    const VoxelGrid reference =
        cfg.reference ? stages.run("load_reference", [&] { return load_volume(*cfg.reference); }) : tpl;
    stages.run("prepare_output", [&] { outputs.prepare(); });

    const Dims original = tpl.dims();
    const PaddedGrid padded_tpl = stages.run("pad", [&] { return pad_to_pow2(tpl, levels); });
    const Dims& pd = padded_tpl.grid.dims();
    const Dims coarse_dims{pd.nx / scale, pd.ny / scale, pd.nz / scale};

    const VoxelGrid coarse = stages.run("coarse_input", [&] {
        if (in.dims() == coarse_dims) {
            VoxelGrid c = in;
            const Spacing& ts = padded_tpl.grid.spacing();
            c.set_spacing({ts.sx * scale, ts.sy * scale, ts.sz * scale});
            return c;
        }
        if (in.dims() != original) {
            throw ValidationError("input dims must equal the template dims or the template dims / 2^levels");
        }
        if (!cfg.simulate_coarse) {
            throw ValidationError("input has template resolution but simulate_coarse is off");
        }
        VoxelGrid c = pad_to_pow2(in, levels).grid;
        c.set_spacing(padded_tpl.grid.spacing());
        for (int l = 0; l < levels; ++l) c = downsample2x(c, cfg.synth.pyramid);
        return c;
    });

    const VoxelGrid completed = stages.run("synthesize", [&] {
        VoxelGrid out;
        if (cfg.backend == Backend::hash) {
            auto r = synthesize_hierarchical(coarse, padded_tpl.grid, cfg.synth);
            double lowest = 1.0;
            for (const auto& s : r.levels) {
                report.levels.push_back(level_json(s));
                report.bytes_index = std::max<std::uint64_t>(report.bytes_index, s.bytes_index);
                lowest = std::min(lowest, s.hit_rate());
            }
            report.hit_rate = lowest;
            const auto active = active_indices(padded_tpl.grid, cfg.synth.nbhd).size();
            report.bytes_features = active * static_cast<std::uint64_t>(cfg.kd_dims) * sizeof(float);
            out = std::move(r.output);
        } else {
            auto r = synthesize_hierarchical_kdtree(coarse, padded_tpl.grid, cfg.synth, cfg.kd_dims);
            for (std::size_t l = 0; l < r.levels.size(); ++l) {
                const auto& s = r.levels[l];
                report.levels.push_back(level_json(s, static_cast<int>(l) + 1));
                report.bytes_index = std::max<std::uint64_t>(report.bytes_index, s.bytes_features + s.bytes_tree);
                report.bytes_features = std::max<std::uint64_t>(report.bytes_features, s.bytes_features);
            }
            out = std::move(r.output);
        }
        out = crop_to(out, original);
        out.set_spacing(tpl.spacing());
        return out;
    });

    const VoxelGrid result = stages.run("implant", [&] {
        if (!defective) return completed;
        return denoise(subtract(completed, *defective), cfg.keep, cfg.morph_radius);
    });

    const Mesh mesh = stages.run("mesh", [&] { return marching_cubes(result); });

    stages.run("metrics", [&] {
        const VoxelGrid& pred = defective ? completed : result;
        report.dsc = dsc(pred, reference);
        if (!pred.empty() && !reference.empty()) {
            const auto h = hausdorff_both(pred, reference);
            report.hd_mm = h.hd_mm;
            report.hd95_mm = h.hd95_mm;
        }
    });

    report.details = {{"config", to_json(cfg)},
                      {"template_dims", dims_json(original)},
                      {"coarse_dims", dims_json(coarse.dims())},
                      {"occupied", result.count()},
                      {"triangles", mesh.triangles.size()},
                      {"vertices", mesh.vertices.size()},
                      {"watertight", is_watertight(mesh)}};
    if (defective) report.details["completed_occupied"] = completed.count();

    stages.run("export", [&] {
        save_volume(result, outputs.file("volume.nrrd"));
        if (defective) save_volume(completed, outputs.file("completed.nrrd"));
        export_mesh(mesh, outputs.file("mesh.stl"));
        write_text(outputs.file("report.json"), report.to_json(false).dump(2) + "\n");
        write_text(outputs.file("timing.json"), json(report.runtime_s).dump(2) + "\n");
    });
    outputs.commit();
    return report;
}

}  // namespace voxsynth
