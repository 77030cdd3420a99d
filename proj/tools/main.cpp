// reconcli: command-line surface of the reconstruction pipeline.
//
//   synth       render a synthetic capture (with optional drift) into the store
//   compensate  replay a raw session into a compensated dataset archive
//   preprocess  crop/resize/mask one dataset archive
//   reconstruct carve and mesh a preprocessed archive
//   run         submit a dataset and drive all stages to completion
//   inspect     pretty-print a poses_bounds table
//   align       difference matrix of two tables as CSV
//   latency     evaluate the end-to-end latency formula

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recon/alignment.hpp"
#include "recon/capture.hpp"
#include "recon/dataset.hpp"
#include "recon/latency.hpp"
#include "recon/orchestrator.hpp"
#include "recon/preprocess.hpp"
#include "recon/reconstruct.hpp"
#include "recon/store.hpp"

using namespace recon;

namespace {

struct GlobalOptions {
    std::string store_root = "./store";
    std::string bucket = "pipeline";
    int retries = 1;
    bool verbose = false;
};

void note(const GlobalOptions& g, const std::string& line) {
    if (g.verbose) std::cerr << line << "\n";
}

// "FRAME:TX,TY,TZ:AX,AY,AZ:DEG" -> a jump of DEG degrees about (AX,AY,AZ)
// plus a translation, applied from FRAME onward.
DriftEvent parse_drift_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 4)
        throw InvalidInput("drift spec '" + spec + "' is not FRAME:TX,TY,TZ:AX,AY,AZ:DEG");

    auto parse_vec = [&](const std::string& s) {
        Vec3 v;
        if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &v.x, &v.y, &v.z) != 3)
            throw InvalidInput("drift spec '" + spec + "': bad vector '" + s + "'");
        return v;
    };

    DriftEvent e;
    try {
        e.frame = std::stoi(parts[0]);
    } catch (const std::logic_error&) {
        throw InvalidInput("drift spec '" + spec + "': bad frame index");
    }
    const Vec3 t = parse_vec(parts[1]);
    const Vec3 axis = parse_vec(parts[2]);
    double degrees = 0.0;
    try {
        degrees = std::stod(parts[3]);
    } catch (const std::logic_error&) {
        throw InvalidInput("drift spec '" + spec + "': bad angle");
    }
    e.jump = {quat_to_rotmat(Quaternion::from_axis_angle(axis, degrees * M_PI / 180.0)), t};
    return e;
}

PoseBoundsTable load_table(const ObjectStore& store, const GlobalOptions& g,
                           const std::string& file, const std::string& key) {
    if (!file.empty()) return read_npy_file(file);
    return read_npy(store.get(g.bucket, key));
}

int cmd_synth(const GlobalOptions& g, int frames, double radius, double height,
              const std::string& shape_name, double size, int image_size, double focal,
              int anchors, double anchor_noise, std::uint64_t seed,
              const std::vector<std::string>& drift_specs, const std::string& out_key,
              const std::string& raw_out_key) {
    CaptureConfig cfg;
    cfg.frames = frames;
    cfg.orbit_radius = radius;
    cfg.orbit_height = height;
    cfg.intrinsics = CameraIntrinsics(image_size, image_size, focal);
    cfg.anchor_count = anchors;
    cfg.anchor_noise_sigma = anchor_noise;
    cfg.seed = seed;
    if (shape_name == "sphere") {
        cfg.shape = SphereShape{{0, 0, 0}, size};
    } else if (shape_name == "box") {
        cfg.shape = BoxShape{{0, 0, 0}, {size, size, size}};
    } else {
        throw InvalidInput("synth: unknown shape '" + shape_name + "'");
    }
    for (const std::string& spec : drift_specs) cfg.drift.push_back(parse_drift_spec(spec));

    note(g, "synth: rendering " + std::to_string(frames) + " frames");
    const CaptureSession session = capture_session(cfg);

    ObjectStore store(g.store_root);
    store.put(g.bucket, out_key, pack_dataset(export_session(session)));
    std::cout << "dataset written to " << g.bucket << "/" << out_key << "\n";
    if (!raw_out_key.empty()) {
        store.put(g.bucket, raw_out_key, pack_raw_session(session));
        std::cout << "raw session written to " << g.bucket << "/" << raw_out_key << "\n";
    }
    return 0;
}

int cmd_compensate(const GlobalOptions& g, const std::string& in_key,
                   const std::string& out_key) {
    ObjectStore store(g.store_root);
    const CaptureSession session = unpack_raw_session(store.get(g.bucket, in_key));
    note(g, "compensate: replaying " + std::to_string(session.reported_track.size()) +
                " frames through the recorder");
    store.put(g.bucket, out_key, pack_dataset(export_session(session)));
    std::cout << "compensated dataset written to " << g.bucket << "/" << out_key << "\n";
    return 0;
}

int cmd_preprocess(const GlobalOptions& g, const std::string& in_key,
                   const std::string& out_key, double tau) {
    ObjectStore store(g.store_root);
    const DatasetArchive input = unpack_dataset(store.get(g.bucket, in_key));
    PreprocessConfig cfg;
    cfg.tau = tau;
    const DatasetArchive output = preprocess_stage(input, cfg);
    store.put(g.bucket, out_key, pack_dataset(output));
    std::cout << "preprocessed dataset written to " << g.bucket << "/" << out_key << "\n";
    return 0;
}

int cmd_reconstruct(const GlobalOptions& g, const std::string& in_key,
                    const std::string& out_prefix, int resolution, double grid_min,
                    double grid_max) {
    ObjectStore store(g.store_root);
    const DatasetArchive input = unpack_dataset(store.get(g.bucket, in_key));
    note(g, "reconstruct: carving " + std::to_string(resolution) + "^3 grid from " +
                std::to_string(input.images.size()) + " views");
    const ReconstructionResult result =
        reconstruct_dataset(input, resolution, grid_min, grid_max);

    const std::string prefix =
        out_prefix.empty() || out_prefix.back() == '/' ? out_prefix : out_prefix + "/";
    store.put_text(g.bucket, prefix + "mesh.obj", mesh_to_obj(result.mesh, "mesh.mtl"));
    store.put_text(g.bucket, prefix + "mesh.mtl", material_to_mtl());
    store.put(g.bucket, prefix + "texture_kd.png", png_encode(result.textures.kd));
    store.put(g.bucket, prefix + "texture_ks.png", png_encode(result.textures.ks));
    store.put(g.bucket, prefix + "texture_n.png", png_encode(result.textures.n));
    std::cout << "artifacts written under " << g.bucket << "/" << prefix << " ("
              << result.mesh.triangles.size() << " triangles, "
              << result.grid.occupied_count() << " occupied voxels)\n";
    return 0;
}

int cmd_run(const GlobalOptions& g, const std::string& dataset_key, int resolution,
            double grid_min, double grid_max, double tau) {
    ObjectStore store(g.store_root);
    OrchestratorConfig cfg;
    cfg.bucket = g.bucket;
    cfg.retries = g.retries;
    cfg.grid_resolution = resolution;
    cfg.grid_min = grid_min;
    cfg.grid_max = grid_max;
    cfg.tau = tau;

    Orchestrator orch(store, cfg);
    const std::string id = orch.submit(dataset_key);
    std::cout << "submitted " << id << " for " << dataset_key << "\n";

    const PipelineRun run = orch.run_to_completion(id);
    for (const StageRecord& s : run.stages) {
        std::cout << "  " << s.name << ": " << to_string(s.state) << " (attempts "
                  << s.attempts << ")";
        if (!s.output_key.empty()) std::cout << " -> " << s.output_key;
        std::cout << "\n";
    }
    if (!run.succeeded()) {
        for (const StageRecord& s : run.stages)
            if (s.state == StageState::Failed)
                std::cerr << "stage " << s.name << " failed: " << s.error << "\n";
        return 2;
    }
    std::cout << "artifacts under runs/" << id << "/artifacts/, previews under runs/" << id
              << "/previews/\n";
    return 0;
}

int cmd_inspect(const GlobalOptions& g, const std::string& file, const std::string& key) {
    ObjectStore store(g.store_root);
    const PoseBoundsTable table = load_table(store, g, file, key);
    std::printf("poses_bounds table: %zu rows x 17\n", table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const PoseRow17& r = table.rows[i];
        std::printf(
            "frame %04zu  t=(%+.4f %+.4f %+.4f)  hwf=(%g %g %g)  bounds=[%.4f, %.4f]\n", i,
            r[3], r[8], r[13], r[4], r[9], r[14], r[15], r[16]);
        if (g.verbose) {
            for (int row = 0; row < 3; ++row)
                std::printf("    R[%d] = %+.6f %+.6f %+.6f\n", row, r[row * 5],
                            r[row * 5 + 1], r[row * 5 + 2]);
        }
    }
    return 0;
}

int cmd_align(const GlobalOptions& g, const std::string& a_file, const std::string& a_key,
              const std::string& b_file, const std::string& b_key,
              const std::string& out_path) {
    ObjectStore store(g.store_root);
    const PoseBoundsTable a = load_table(store, g, a_file, a_key);
    const PoseBoundsTable b = load_table(store, g, b_file, b_key);
    const DifferenceMatrix dm = difference_matrix(a, b);
    const std::string csv = difference_matrix_to_csv(dm);
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw IoError("align: cannot open " + out_path);
        f << csv;
        std::cout << "difference matrix written to " << out_path << " (frobenius "
                  << dm.frobenius << ")\n";
    }
    return 0;
}

int cmd_latency(double scan, double upload, double download, double signal,
                double preprocessing, double reconstruction, bool simplified) {
    LatencyReport r;
    r.scan = scan;
    r.upload = upload;
    r.download = download;
    r.signal = signal;
    r.preprocessing = preprocessing;
    r.reconstruction = reconstruction;
    std::printf("%g\n", latency_total(r, simplified));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale staged 3D reconstruction pipeline"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--store", g.store_root, "object store root directory")
        ->capture_default_str();
    app.add_option("--bucket", g.bucket, "object store bucket")->capture_default_str();
    app.add_option("--retries", g.retries, "retry budget per pipeline stage")
        ->capture_default_str();
    app.add_flag("-v,--verbose", g.verbose, "chatty diagnostics on stderr");

    // synth
    auto* synth = app.add_subcommand("synth", "render a synthetic capture into the store");
    int frames = 36, image_size = 512, anchors = 4, resolution = 96;
    double radius = 2.0, height = 0.0, size = 0.35, focal = 300.0, anchor_noise = 0.0;
    double tau = 0.5, grid_min = -0.5, grid_max = 0.5;
    std::uint64_t seed = 1;
    std::string shape_name = "sphere", out_key, raw_out_key, in_key, out_prefix = "artifacts/";
    std::vector<std::string> drift_specs;
    synth->add_option("--frames", frames, "number of views")->capture_default_str();
    synth->add_option("--radius", radius, "orbit radius, meters")->capture_default_str();
    synth->add_option("--height", height, "orbit height, meters")->capture_default_str();
    synth->add_option("--shape", shape_name, "sphere or box")->capture_default_str();
    synth->add_option("--size", size, "sphere radius / box half-extent, meters")
        ->capture_default_str();
    synth->add_option("--image-size", image_size, "square image side, pixels")
        ->capture_default_str();
    synth->add_option("--focal", focal, "focal length, pixels")->capture_default_str();
    synth->add_option("--anchors", anchors, "anchor count")->capture_default_str();
    synth->add_option("--anchor-noise", anchor_noise, "anchor observation noise sigma")
        ->capture_default_str();
    synth->add_option("--seed", seed, "deterministic seed")->capture_default_str();
    synth->add_option("--drift", drift_specs,
                      "drift event FRAME:TX,TY,TZ:AX,AY,AZ:DEG (repeatable)");
    synth->add_option("--out", out_key, "store key for the dataset zip")->required();
    synth->add_option("--raw-out", raw_out_key, "store key for the raw session zip");

    // compensate
    auto* compensate =
        app.add_subcommand("compensate", "raw session -> compensated dataset archive");
    std::string comp_in, comp_out;
    compensate->add_option("--in", comp_in, "store key of the raw session zip")->required();
    compensate->add_option("--out", comp_out, "store key for the dataset zip")->required();

    // preprocess
    auto* preprocess = app.add_subcommand("preprocess", "crop, resize, and mask a dataset");
    std::string pre_in, pre_out;
    preprocess->add_option("--in", pre_in, "store key of the dataset zip")->required();
    preprocess->add_option("--out", pre_out, "store key for the preprocessed zip")->required();
    preprocess->add_option("--tau", tau, "mask sharpening threshold in (0,1)")
        ->capture_default_str();

    // reconstruct
    auto* reconstruct =
        app.add_subcommand("reconstruct", "carve and mesh a preprocessed dataset");
    reconstruct->add_option("--in", in_key, "store key of the preprocessed zip")->required();
    reconstruct->add_option("--out-prefix", out_prefix, "store prefix for the artifacts")
        ->capture_default_str();
    reconstruct->add_option("--res", resolution, "voxel grid resolution per axis")
        ->capture_default_str();
    reconstruct->add_option("--grid-min", grid_min, "cube bound minimum, meters")
        ->capture_default_str();
    reconstruct->add_option("--grid-max", grid_max, "cube bound maximum, meters")
        ->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "drive all stages for one dataset");
    std::string dataset_key;
    run->add_option("--dataset", dataset_key, "store key of the uploaded dataset zip")
        ->required();
    run->add_option("--res", resolution, "voxel grid resolution per axis")
        ->capture_default_str();
    run->add_option("--grid-min", grid_min, "cube bound minimum, meters")
        ->capture_default_str();
    run->add_option("--grid-max", grid_max, "cube bound maximum, meters")
        ->capture_default_str();
    run->add_option("--tau", tau, "mask sharpening threshold in (0,1)")
        ->capture_default_str();

    // inspect
    auto* inspect = app.add_subcommand("inspect", "pretty-print a poses_bounds table");
    std::string inspect_file, inspect_key;
    inspect->add_option("--file", inspect_file, "path of a poses_bounds .npy file");
    inspect->add_option("--key", inspect_key, "store key of a poses_bounds .npy object");

    // align
    auto* align = app.add_subcommand("align", "difference matrix of two tables as CSV");
    std::string a_file, a_key, b_file, b_key, align_out;
    align->add_option("--a", a_file, "path of table A (.npy)");
    align->add_option("--a-key", a_key, "store key of table A");
    align->add_option("--b", b_file, "path of table B (.npy)");
    align->add_option("--b-key", b_key, "store key of table B");
    align->add_option("--out", align_out, "CSV output path ('-' for stdout)");

    // latency
    auto* latency = app.add_subcommand("latency", "evaluate the latency formula");
    double scan = 0, upload = 0, download = 0, signal = 0, preprocessing = 0,
           reconstruction = 0;
    bool simplified = false;
    latency->add_option("--scan", scan, "seconds")->capture_default_str();
    latency->add_option("--upload", upload, "seconds")->capture_default_str();
    latency->add_option("--download", download, "seconds")->capture_default_str();
    latency->add_option("--signal", signal, "seconds")->capture_default_str();
    latency->add_option("--preprocessing", preprocessing, "seconds")->capture_default_str();
    latency->add_option("--reconstruction", reconstruction, "seconds")
        ->capture_default_str();
    latency->add_flag("--simplified", simplified, "drop the transfer and signal terms");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(g, frames, radius, height, shape_name, size, image_size, focal,
                             anchors, anchor_noise, seed, drift_specs, out_key, raw_out_key);
        if (compensate->parsed()) return cmd_compensate(g, comp_in, comp_out);
        if (preprocess->parsed()) return cmd_preprocess(g, pre_in, pre_out, tau);
        if (reconstruct->parsed())
            return cmd_reconstruct(g, in_key, out_prefix, resolution, grid_min, grid_max);
        if (run->parsed())
            return cmd_run(g, dataset_key, resolution, grid_min, grid_max, tau);
        if (inspect->parsed()) {
            if (inspect_file.empty() == inspect_key.empty())
                throw InvalidInput("inspect: pass exactly one of --file or --key");
            return cmd_inspect(g, inspect_file, inspect_key);
        }
        if (align->parsed()) {
            if (a_file.empty() == a_key.empty() || b_file.empty() == b_key.empty())
                throw InvalidInput("align: pass exactly one of --a/--a-key and --b/--b-key");
            return cmd_align(g, a_file, a_key, b_file, b_key, align_out);
        }
        if (latency->parsed())
            return cmd_latency(scan, upload, download, signal, preprocessing,
                               reconstruction, simplified);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
