#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "voxsynth/error.hpp"
#include "voxsynth/mesh.hpp"
#include "voxsynth/metrics.hpp"
#include "voxsynth/parallel.hpp"
#include "voxsynth/phantom.hpp"
#include "voxsynth/pipeline.hpp"
#include "voxsynth/resample.hpp"
#include "voxsynth/synthesis.hpp"
#include "voxsynth/volume_io.hpp"

namespace {

using namespace voxsynth;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

Dims parse_dims(const std::string& s) {
    std::vector<std::int64_t> v;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stoll(part, &used));
            if (used != part.size()) throw ValidationError("");
        } catch (const std::exception&) {
            throw ValidationError("bad dims '" + s + "' (use N or NXxNYxNZ)");
        }
    }
    if (v.size() == 1) return {v[0], v[0], v[0]};
    if (v.size() == 3) return {v[0], v[1], v[2]};
    throw ValidationError("bad dims '" + s + "' (use N or NXxNYxNZ)");
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct RunArgs {
    std::string input, tpl, out, config, defective, reference;
    std::string backend, fallback, parallel;
    int levels = 0, nbhd = 0, radius = 0, kd_dims = 0;
    std::uint64_t seed = 0;
};

int cmd_run(const RunArgs& a, const CLI::App& sub) {
    PipelineConfig cfg;
    if (!a.config.empty()) cfg = load_pipeline_config(a.config, cfg);
    if (sub.count("--backend")) cfg.backend = parse_backend(a.backend);
    if (sub.count("--levels")) cfg.synth.levels = a.levels;
    if (sub.count("--nbhd")) cfg.synth.nbhd = neighborhood_from_int(a.nbhd);
    if (sub.count("--radius")) cfg.synth.radius = a.radius;
    if (sub.count("--fallback")) cfg.synth.fallback = parse_fallback(a.fallback);
    if (sub.count("--seed")) cfg.synth.seed = a.seed;
    if (sub.count("--parallel")) cfg.synth.parallel = parse_parallel(a.parallel);
    if (sub.count("--kd-dims")) cfg.kd_dims = a.kd_dims;
    if (!a.defective.empty()) cfg.defective = a.defective;
    if (!a.reference.empty()) cfg.reference = a.reference;
    if (cfg.synth.parallel.kind != ParallelMode::Kind::serial) {
        cfg.synth.parallel.workers = resolve_threads(cfg.synth.parallel.workers);
    }
    const MetricReport report = run_pipeline(a.input, a.tpl, cfg, a.out);
    std::cout << report.to_json(true).dump(2) << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path) {
    const VoxelGrid pred = load_volume(pred_path);
    const VoxelGrid gt = load_volume(gt_path);
    json j;
    j["dsc"] = dsc(pred, gt);
    std::optional<double> hd, hd95;
    if (!pred.empty() && !gt.empty()) {
        const auto h = hausdorff_both(pred, gt);
        hd = h.hd_mm;
        hd95 = h.hd95_mm;
    }
    j["hd_mm"] = optional_json(hd);
    j["hd95_mm"] = optional_json(hd95);
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_mesh(const std::string& in, const std::string& out) {
    const VoxelGrid grid = load_volume(in);
    const MeshFormat format = mesh_format_from_path(out);
    const Mesh mesh = marching_cubes(grid);
    export_mesh(mesh, out, format);
    json j{{"triangles", mesh.triangles.size()},
           {"vertices", mesh.vertices.size()},
           {"watertight", is_watertight(mesh)},
           {"area_mm2", surface_area(mesh)},
           {"volume_mm3", signed_volume(mesh)}};
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

struct PhantomArgs {
    std::string kind, dims = "64", out;
    double r_in = -1.0, r_out = -1.0, perturb = 0.0, spacing = 1.0;
    std::int64_t side = 0, base = 1, step = 1;
    bool alternating = false;
    std::uint64_t seed = 0;
};

int cmd_phantom(const PhantomArgs& a) {
    const Dims dims = parse_dims(a.dims);
    const PhantomKind kind = parse_phantom_kind(a.kind);
    PhantomParams p = standard_shell(std::min({dims.nx, dims.ny, dims.nz}));
    if (a.r_in >= 0.0) p.r_in = a.r_in;
    if (a.r_out >= 0.0) p.r_out = a.r_out;
    p.perturb_rate = a.perturb;
    p.side = a.side;
    p.base = a.base;
    p.step = a.step;
    p.alternating = a.alternating;
    const VoxelGrid g = make_phantom(kind, dims, p, a.seed, Spacing{a.spacing, a.spacing, a.spacing});
    save_volume(g, a.out);
    std::cout << json{{"kind", to_string(kind)}, {"occupied", g.count()}, {"out", a.out}}.dump(2) << '\n';
    return kExitOk;
}

int cmd_bench(std::int64_t n, int threads, const std::string& mode, std::uint64_t seed) {
    if (n != 64 && n != 128 && n != 256) throw ValidationError("--level-size must be 64, 128 or 256");
    threads = resolve_threads(threads);
    const VoxelGrid tpl = make_phantom(PhantomKind::sphere_shell, {n, n, n}, standard_shell(n));
    const VoxelGrid guess = upsample_interp(downsample2x(tpl), 2, InterpOrder::trilinear);
    SynthesisConfig cfg;
    cfg.seed = seed;
    cfg.parallel = mode == "partitioned" ? ParallelMode::partitioned(threads) : ParallelMode::shared(threads);
    if (mode != "shared" && mode != "partitioned") throw ValidationError("--mode must be shared or partitioned");
    LevelStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    const VoxelGrid out = synthesize_level(guess, tpl, cfg, &stats);
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json j{{"level_size", n},
           {"threads", threads},
           {"mode", mode},
           {"seconds_total", total},
           {"seconds_index", stats.seconds_index},
           {"seconds_synthesis", stats.seconds_synthesis},
           {"queries", stats.queries},
           {"hits_actual", stats.hits_actual},
           {"hits_neighbor", stats.hits_neighbor},
           {"fallbacks", stats.fallbacks},
           {"hit_rate", stats.hit_rate()},
           {"keys_actual", stats.keys_actual},
           {"keys_neighbor", stats.keys_neighbor},
           {"bytes_index", stats.bytes_index},
           {"mismatch_vs_template", xor_count(out, tpl)}};
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Template-guided upsampling of binary volumes"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Synthesize a fine volume from a coarse (or full-size) input");
    run_cmd->add_option("--input", run.input, "Coarse input, or a full-size volume to downsample")->required();
    run_cmd->add_option("--template", run.tpl, "Template volume")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_option("--config", run.config, "JSON file with pipeline defaults");
    run_cmd->add_option("--backend", run.backend, "hash or kdtree");
    run_cmd->add_option("--levels", run.levels, "Pyramid levels");
    run_cmd->add_option("--nbhd", run.nbhd, "Neighborhood size (3 or 5)");
    run_cmd->add_option("--radius", run.radius, "Hamming radius of the neighbor table");
    run_cmd->add_option("--fallback", run.fallback, "random, keep or majority");
    run_cmd->add_option("--seed", run.seed, "Fallback seed");
    run_cmd->add_option("--parallel", run.parallel, "serial, shared:P or partitioned:P");
    run_cmd->add_option("--kd-dims", run.kd_dims, "PCA dimensions for the kdtree backend");
    run_cmd->add_option("--defective", run.defective, "Defective volume; output becomes the extracted implant");
    run_cmd->add_option("--reference", run.reference, "Ground truth for metrics (default: template)");

    std::string pred, gt;
    auto* eval_cmd = app.add_subcommand("eval", "DSC and Hausdorff distances between two volumes");
    eval_cmd->add_option("--pred", pred)->required();
    eval_cmd->add_option("--gt", gt)->required();

    std::string mesh_in, mesh_out;
    auto* mesh_cmd = app.add_subcommand("mesh", "Marching cubes to STL or OBJ");
    mesh_cmd->add_option("--input", mesh_in)->required();
    mesh_cmd->add_option("--out", mesh_out, "Output .stl or .obj")->required();

    PhantomArgs ph;
    auto* phantom_cmd = app.add_subcommand("phantom", "Write a synthetic volume");
    phantom_cmd->add_option("--kind", ph.kind, "sphere_shell, staircase or cube")->required();
    phantom_cmd->add_option("--out", ph.out)->required();
    phantom_cmd->add_option("--dims", ph.dims, "N or NXxNYxNZ");
    phantom_cmd->add_option("--r-in", ph.r_in);
    phantom_cmd->add_option("--r-out", ph.r_out);
    phantom_cmd->add_option("--perturb", ph.perturb, "Surface toggle probability");
    phantom_cmd->add_option("--side", ph.side);
    phantom_cmd->add_option("--base", ph.base);
    phantom_cmd->add_option("--step", ph.step);
    phantom_cmd->add_flag("--alternating", ph.alternating);
    phantom_cmd->add_option("--spacing", ph.spacing, "Isotropic spacing in mm");
    phantom_cmd->add_option("--seed", ph.seed);

    std::int64_t level_size = 128;
    int threads = 4;
    std::string mode = "shared";
    std::uint64_t bench_seed = 0;
    auto* bench_cmd = app.add_subcommand("bench", "Time one synthesis level on a shell phantom");
    bench_cmd->add_option("--level-size", level_size, "64, 128 or 256");
    bench_cmd->add_option("--threads", threads);
    bench_cmd->add_option("--mode", mode, "shared or partitioned");
    bench_cmd->add_option("--seed", bench_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run_cmd) return cmd_run(run, *run_cmd);
        if (*eval_cmd) return cmd_eval(pred, gt);
        if (*mesh_cmd) return cmd_mesh(mesh_in, mesh_out);
        if (*phantom_cmd) return cmd_phantom(ph);
        if (*bench_cmd) return cmd_bench(level_size, threads, mode, bench_seed);
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.category()) {
            case StageError::Category::validation: return kExitValidation;
            case StageError::Category::io: return kExitIo;
            case StageError::Category::internal: return kExitInternal;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
