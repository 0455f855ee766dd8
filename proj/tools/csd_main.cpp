#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "csd/decompose.hpp"
#include "csd/metrics.hpp"
#include "csd/synth.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace csd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPipeline = 3;

struct ConfigCli {
    std::string config_path;
    RunConfig cfg;
    // track which flags were set so a --config file does not clobber them
    CLI::Option *o_alpha_s = nullptr, *o_alpha_e = nullptr, *o_theta_h = nullptr,
                *o_theta_c = nullptr, *o_metric = nullptr, *o_sf = nullptr, *o_axis = nullptr,
                *o_threads = nullptr, *o_seed = nullptr, *o_minbl = nullptr, *o_maxb = nullptr,
                *o_nsamp = nullptr;
    std::string metric_str = "modified", axis_str = "linear";
};

void add_config_flags(CLI::App* app, ConfigCli& c) {
    c.o_alpha_s = app->add_option("--alpha-s", c.cfg.alpha_s, "Outer interval factor (>= 1)");
    c.o_alpha_e = app->add_option("--alpha-e", c.cfg.alpha_e, "Inner interval factor (>= 0)");
    c.o_theta_h = app->add_option("--theta-h", c.cfg.theta_h, "Similarity threshold in (0,1)");
    c.o_theta_c = app->add_option("--theta-c", c.cfg.theta_c_deg,
                                  "Merge angle threshold, degrees; >180 forces singletons");
    c.o_metric = app->add_option("--metric", c.metric_str, "Contour metric: hausdorff | modified");
    c.o_sf = app->add_option("--sf", c.cfg.sf, "Sub-skeleton sampling factor (>= 1)");
    c.o_axis = app->add_option("--axis", c.axis_str, "Cylinder axis: linear | spline | sine");
    c.o_threads = app->add_option("--threads", c.cfg.threads, "Batch worker count");
    c.o_seed = app->add_option("--seed", c.cfg.seed, "Random seed (noise injection)");
    c.o_minbl = app->add_option("--min-branch-length", c.cfg.min_branch_length,
                                "Minimal branch length; 0 = auto");
    c.o_maxb = app->add_option("--max-branches", c.cfg.max_branches, "Branch cap");
    c.o_nsamp = app->add_option("--n-samples", c.cfg.n_samples, "Contour sample count");
    app->add_option("--config", c.config_path, "JSON config file (flags override it)");
}

RunConfig resolve_config(const ConfigCli& c) {
    RunConfig cfg;
    if (!c.config_path.empty()) cfg = load_config(c.config_path);
    if (const char* env = std::getenv("CSD_THREADS")) cfg.threads = std::max(1, std::atoi(env));
    auto take = [](CLI::Option* opt) { return opt && opt->count() > 0; };
    if (take(c.o_alpha_s)) cfg.alpha_s = c.cfg.alpha_s;
    if (take(c.o_alpha_e)) cfg.alpha_e = c.cfg.alpha_e;
    if (take(c.o_theta_h)) cfg.theta_h = c.cfg.theta_h;
    if (take(c.o_theta_c)) cfg.theta_c_deg = c.cfg.theta_c_deg;
    if (take(c.o_metric)) cfg.metric = metric_from_name(c.metric_str);
    if (take(c.o_sf)) cfg.sf = c.cfg.sf;
    if (take(c.o_axis)) cfg.axis = axis_from_name(c.axis_str);
    if (take(c.o_threads)) cfg.threads = c.cfg.threads;
    if (take(c.o_seed)) cfg.seed = c.cfg.seed;
    if (take(c.o_minbl)) cfg.min_branch_length = c.cfg.min_branch_length;
    if (take(c.o_maxb)) cfg.max_branches = c.cfg.max_branches;
    if (take(c.o_nsamp)) cfg.n_samples = c.cfg.n_samples;
    cfg.validate();
    return cfg;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write file: " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

void save_volume_atomic(const BinaryVolume& vol, const fs::path& path) {
    fs::path tmp = path.parent_path() / (path.filename().string() + ".tmp.nrrd");
    save_volume(vol, tmp.string(), VolumeFormat::nrrd);
    fs::rename(tmp, path);
}

void save_labels_atomic(const LabelVolume& labels, const fs::path& path) {
    fs::path tmp = path.parent_path() / (path.filename().string() + ".tmp.nrrd");
    save_labels(labels, tmp.string(), VolumeFormat::nrrd);
    fs::rename(tmp, path);
}

int cmd_synth(const std::string& preset, const std::string& scene_path, const std::string& dims_str,
              double radius, const std::string& out_dir) {
    try {
        Vec3i dims{128, 128, 128};
        Vec3 spacing{1, 1, 1};
        if (!dims_str.empty()) {
            if (std::sscanf(dims_str.c_str(), "%dx%dx%d", &dims.x, &dims.y, &dims.z) != 3)
                throw Error("cannot parse --dims, expected WxHxD");
        }
        std::vector<TubeSpec> specs;
        if (!scene_path.empty()) {
            load_scene_header(scene_path, dims, spacing);
            specs = load_scene_spec(scene_path);
        } else if (preset == "tube") {
            specs = presets::straight_tube(dims, radius);
        } else if (preset == "xcross") {
            specs = presets::x_crossing(dims, radius);
        } else if (preset == "tjunction") {
            specs = presets::t_junction(dims, radius);
        } else if (preset == "weave") {
            specs = presets::weave(dims, radius);
        } else if (preset == "five") {
            specs = presets::five_branch(dims, radius);
        } else if (preset == "fourleg") {
            specs = presets::four_leg(dims, radius + 2.0, radius);
        } else if (preset == "taper") {
            specs = presets::tapered_tube(dims, radius, std::max(2.0, radius / 2.0));
        } else {
            throw Error("unknown preset '" + preset +
                        "' (tube | xcross | tjunction | weave | five | fourleg | taper)");
        }

        SynthScene scene = rasterize_scene(specs, dims, spacing);
        fs::create_directories(out_dir);
        save_volume_atomic(scene.volume, fs::path(out_dir) / "volume.nrrd");
        save_labels_atomic(scene.ground_truth, fs::path(out_dir) / "truth.nrrd");

        nlohmann::json jaxes = nlohmann::json::array();
        for (std::size_t i = 0; i < scene.axes.size(); ++i) {
            nlohmann::json ja;
            ja["label"] = i + 1;
            ja["points"] = nlohmann::json::array();
            for (const Vec3& p : scene.axes[i]) ja["points"].push_back({p.x, p.y, p.z});
            jaxes.push_back(std::move(ja));
        }
        write_text_atomic(fs::path(out_dir) / "axes.json", jaxes.dump(2) + "\n");
        save_scene_spec(specs, dims, spacing, (fs::path(out_dir) / "scene.json").string());
        std::cout << "synth: " << scene.volume.foreground_count() << " foreground voxels, "
                  << specs.size() << " tubes -> " << out_dir << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "synth: " << e.what() << "\n";
        return kExitInput;
    }
}

int cmd_skeletonize(const std::string& input, const std::string& output, const std::string& mesh_path,
                    const RunConfig& cfg) {
    BinaryVolume vol;
    try {
        vol = load_volume(input);
    } catch (const std::exception& e) {
        std::cerr << "skeletonize: " << e.what() << "\n";
        return kExitInput;
    }
    try {
        SkeletonParams sp;
        sp.min_branch_length = cfg.min_branch_length;
        sp.max_branches = cfg.max_branches;
        CurveSkeleton skel = extract_skeleton(vol, sp);
        write_text_atomic(output, skeleton_to_json(skel) + "\n");
        if (!mesh_path.empty()) {
            // polyline overlay as OBJ line elements
            std::ofstream out(mesh_path);
            if (!out) throw Error("cannot write file: " + mesh_path);
            std::size_t base = 1;
            for (const Polyline& b : skel.branches) {
                for (const Vec3& p : b.points) out << "v " << p.x << " " << p.y << " " << p.z << "\n";
                out << "l";
                for (std::size_t i = 0; i < b.points.size(); ++i) out << " " << base + i;
                out << "\n";
                base += b.points.size();
            }
        }
        std::cout << "skeletonize: " << skel.branches.size() << " branches, "
                  << skel.junction_nodes().size() << " junctions -> " << output << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "skeletonize: " << e.what() << "\n";
        return kExitPipeline;
    }
}

struct BatchItem {
    fs::path input;
    std::string name;
    bool ok = false;
    std::string message;
};

int decompose_one(const fs::path& input, const fs::path& out_dir, const RunConfig& cfg, bool trace,
                  bool mesh, std::string* message) {
    BinaryVolume vol;
    try {
        vol = load_volume(input.string());
    } catch (const std::exception& e) {
        if (message) *message = e.what();
        else std::cerr << "decompose: " << e.what() << "\n";
        return kExitInput;
    }
    try {
        DecompositionResult result = decompose(vol, cfg, trace);
        fs::create_directories(out_dir);
        save_labels_atomic(result.labels, out_dir / "labels.nrrd");
        write_text_atomic(out_dir / "provenance.json", result.provenance + "\n");
        write_text_atomic(out_dir / "skeleton.json", skeleton_to_json(result.skeleton) + "\n");
        if (trace) {
            fs::create_directories(out_dir / "trace");
            for (std::size_t i = 0; i < result.traces.size(); ++i) {
                std::ostringstream name;
                name << "interval_" << i << "_subskel" << result.traces[i].interval.subskel
                     << (result.traces[i].interval.side > 0 ? "_plus" : "_minus") << ".csv";
                write_text_atomic(out_dir / "trace" / name.str(), sweep_trace_csv(result.traces[i]));
            }
        }
        if (mesh) {
            std::uint32_t maxl = result.labels.max_label();
            for (std::uint32_t l = 1; l <= maxl; ++l) {
                TriangleMesh m = marching_cubes(result.labels, l);
                std::ostringstream name;
                name << "label_" << l << ".obj";
                save_mesh_obj(m, (out_dir / name.str()).string());
            }
        }
        std::ostringstream os;
        os << result.m << " components, " << result.n_parts << " parts, " << result.n_intersections
           << " intersections";
        if (message) *message = os.str();
        else std::cout << "decompose: " << os.str() << " -> " << out_dir.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        if (message) *message = e.what();
        else std::cerr << "decompose: " << e.what() << "\n";
        return kExitPipeline;
    }
}

int cmd_decompose(const std::string& input, const std::string& out_dir, const RunConfig& cfg,
                  bool trace, bool mesh) {
    fs::path in(input);
    if (!fs::exists(in)) {
        std::cerr << "decompose: input not found: " << input << "\n";
        return kExitInput;
    }
    if (!fs::is_directory(in))
        return decompose_one(in, out_dir, cfg, trace, mesh, nullptr);

    // batch: every volume in the directory, isolated failures
    std::vector<BatchItem> items;
    for (const auto& entry : fs::directory_iterator(in)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        if (ext == ".nrrd" || ext == ".nhdr" || ext == ".json") {
            BatchItem item;
            item.input = entry.path();
            item.name = entry.path().stem().string();
            items.push_back(std::move(item));
        }
    }
    std::sort(items.begin(), items.end(),
              [](const BatchItem& a, const BatchItem& b) { return a.name < b.name; });

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t k = next.fetch_add(1);
            if (k >= items.size()) break;
            BatchItem& item = items[k];
            std::string msg;
            int rc = decompose_one(item.input, fs::path(out_dir) / item.name, cfg, trace, mesh, &msg);
            item.ok = rc == kExitOk;
            item.message = msg;
        }
    };
    std::vector<std::thread> pool;
    int n_workers = std::max(1, cfg.threads);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::size_t ok = 0;
    for (const BatchItem& item : items) {
        std::cout << (item.ok ? "ok    " : "failed") << " " << item.name << ": " << item.message
                  << "\n";
        if (item.ok) ++ok;
    }
    std::cout << "batch summary: " << ok << " ok / " << items.size() - ok << " failed of "
              << items.size() << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& pred, const std::string& truth, const std::string& csv,
                 double boundary_tol) {
    LabelVolume a, b;
    try {
        a = load_labels(pred);
        b = load_labels(truth);
    } catch (const std::exception& e) {
        std::cerr << "evaluate: " << e.what() << "\n";
        return kExitInput;
    }
    try {
        MetricReport report = evaluate_labelings(a, b, boundary_tol);
        std::cout << report.to_json() << "\n";
        if (!csv.empty()) {
            bool fresh = !fs::exists(csv);
            std::ofstream out(csv, std::ios::app);
            if (fresh) out << "pred,truth," << MetricReport::csv_header() << "\n";
            out << pred << "," << truth << "," << report.to_csv_row() << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "evaluate: " << e.what() << "\n";
        return kExitInput;
    }
}

int cmd_mesh(const std::string& input, const std::string& output, int label, double iso) {
    try {
        TriangleMesh mesh;
        if (label > 0) {
            LabelVolume labels = load_labels(input);
            mesh = marching_cubes(labels, std::uint32_t(label), iso);
        } else {
            BinaryVolume vol = load_volume(input);
            mesh = marching_cubes(vol, iso);
        }
        std::string ext = fs::path(output).extension().string();
        if (ext == ".stl")
            save_mesh_stl(mesh, output);
        else
            save_mesh_obj(mesh, output);
        std::cout << "mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
                  << " triangles -> " << output << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "mesh: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"csd: semantic decomposition of voxel-based tubular objects"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic tubular scene");
    std::string sy_preset = "tube", sy_scene, sy_dims, sy_out = "synth_out";
    double sy_radius = 8.0;
    synth->add_option("--preset", sy_preset, "tube | xcross | tjunction | weave | five | fourleg | taper");
    synth->add_option("--scene", sy_scene, "Scene spec JSON (overrides --preset)");
    synth->add_option("--dims", sy_dims, "Grid size WxHxD");
    synth->add_option("--radius", sy_radius, "Tube radius, world units");
    synth->add_option("--out", sy_out, "Output directory")->required();

    // skeletonize
    auto* skel = app.add_subcommand("skeletonize", "Extract the curve skeleton");
    std::string sk_in, sk_out = "skeleton.json", sk_mesh;
    ConfigCli sk_cfg;
    skel->add_option("--input", sk_in, "Volume (NRRD or raw+json)")->required();
    skel->add_option("--output", sk_out, "Skeleton JSON path");
    skel->add_option("--mesh", sk_mesh, "Optional OBJ polyline overlay");
    add_config_flags(skel, sk_cfg);

    // decompose
    auto* dec = app.add_subcommand("decompose", "Decompose a volume (or a directory of volumes)");
    std::string de_in, de_out = "csd_out";
    bool de_trace = false, de_mesh = false;
    ConfigCli de_cfg;
    dec->add_option("--input", de_in, "Volume or directory")->required();
    dec->add_option("--out", de_out, "Output directory");
    dec->add_flag("--trace", de_trace, "Write per-interval H_rho CSVs");
    dec->add_flag("--mesh", de_mesh, "Export per-label OBJ meshes");
    add_config_flags(dec, de_cfg);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Compare two label volumes");
    std::string ev_pred, ev_truth, ev_csv;
    double ev_tol = 0.0;
    eval->add_option("--pred", ev_pred, "Predicted labels")->required();
    eval->add_option("--truth", ev_truth, "Reference labels")->required();
    eval->add_option("--csv", ev_csv, "Append a CSV row to this file");
    eval->add_option("--boundary-tol", ev_tol, "Boundary matching tolerance, voxels");

    // mesh
    auto* mesh = app.add_subcommand("mesh", "Export a surface mesh");
    std::string me_in, me_out = "mesh.obj";
    int me_label = 0;
    double me_iso = 0.5;
    mesh->add_option("--input", me_in, "Volume")->required();
    mesh->add_option("--output", me_out, "OBJ or STL path");
    mesh->add_option("--label", me_label, "Label id (0 = binary volume)");
    mesh->add_option("--iso", me_iso, "Iso level");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(sy_preset, sy_scene, sy_dims, sy_radius, sy_out);
        if (skel->parsed())
            return cmd_skeletonize(sk_in, sk_out, sk_mesh, resolve_config(sk_cfg));
        if (dec->parsed())
            return cmd_decompose(de_in, de_out, resolve_config(de_cfg), de_trace, de_mesh);
        if (eval->parsed())
            return cmd_evaluate(ev_pred, ev_truth, ev_csv, ev_tol);
        if (mesh->parsed())
            return cmd_mesh(me_in, me_out, me_label, me_iso);
    } catch (const std::exception& e) {
        std::cerr << "csd: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
