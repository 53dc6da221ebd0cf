#include "viewsynth/cli.hpp"

#include "viewsynth/errors.hpp"
#include "viewsynth/json_io.hpp"
#include "viewsynth/modelaug.hpp"
#include "viewsynth/rng.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace viewsynth {

namespace fs = std::filesystem;
using nlohmann::json;

void Workspace::check() const
{
    if (!fs::is_directory(root)) {
        throw InputError("workspace root " + root.string() + " is not a directory");
    }
}

namespace {

std::string shortest(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

void ensure_parent(const fs::path& path)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
}

// Strict view over a JSON object: typed access with field paths in errors,
// and a final check that rejects unknown keys.
class Fields
{
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            throw InputError(path_ + ": expected an object");
        }
    }

    bool has(const std::string& key)
    {
        used_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    const json& raw(const std::string& key)
    {
        if (!has(key)) {
            throw InputError(where(key) + ": required field missing");
        }
        return j_.at(key);
    }

    template <typename T>
    T get(const std::string& key)
    {
        const json& v = raw(key);
        return convert<T>(v, where(key));
    }

    template <typename T>
    T get(const std::string& key, T fallback)
    {
        return has(key) ? get<T>(key) : fallback;
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) {
                throw InputError(where(key) + ": unknown field");
            }
        }
    }

    template <typename T>
    static T convert(const json& v, const std::string& where)
    {
        if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                throw InputError(where + ": expected a string");
            }
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) {
                throw InputError(where + ": expected a boolean");
            }
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_unsigned()) {
                throw InputError(where + ": expected a non-negative integer");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                throw InputError(where + ": expected an integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw InputError(where + ": expected a number");
            }
        }
        return v.get<T>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

BinLayout parse_layout(const json& j, const std::string& path)
{
    Fields f(j, path);
    const BinLayout def;
    const int a = f.get<int>("azimuth_bins", def.azimuth_bins());
    const int e = f.get<int>("elevation_bins", def.elevation_bins());
    const int i = f.get<int>("inplane_bins", def.inplane_bins());
    f.finish();
    try {
        return BinLayout(a, e, i);
    } catch (const std::invalid_argument& ex) {
        throw InputError(path + ": " + ex.what());
    }
}

RenderConfig parse_render(const json& j, const std::string& path)
{
    Fields f(j, path);
    RenderConfig r;
    r.width = f.get<int>("width", r.width);
    r.height = f.get<int>("height", r.height);
    r.ambient = f.get<double>("ambient", r.ambient);
    r.diffuse_scale = f.get<double>("diffuse_scale", r.diffuse_scale);
    f.finish();
    try {
        r.validate();
    } catch (const std::exception& ex) {
        throw InputError(path + ": " + ex.what());
    }
    return r;
}

} // namespace

DistributionSet cmd_fit_dist(const GlobalOptions& g, const fs::path& annotations, const fs::path& out,
                             const std::vector<std::string>& required_categories, std::ostream& log)
{
    g.workspace.check();
    const auto records = read_annotations(g.workspace.resolve(annotations));
    const std::set<std::string> required(required_categories.begin(), required_categories.end());
    const DistributionSet set = estimate_distributions(records, required);
    const fs::path dest = g.workspace.resolve(out);
    ensure_parent(dest);
    write_json_file(dest, distributions_to_json(set));
    for (const auto& [category, dist] : set) {
        log << category << ": " << dist.record_count << " records\n";
    }
    log << "wrote " << dest.string() << '\n';
    return set;
}

int cmd_deform(const GlobalOptions& g, const std::vector<fs::path>& models, const DeformOptions& opts,
               const fs::path& out_dir, std::ostream& log)
{
    g.workspace.check();
    if (opts.count < 0) {
        throw InputError("count must be non-negative");
    }
    if (opts.resolution < 2) {
        throw InputError("resolution must be at least 2");
    }
    if (opts.stddev && !(*opts.stddev >= 0.0)) {
        throw InputError("stddev must be non-negative");
    }
    const fs::path dest = g.workspace.resolve(out_dir);
    fs::create_directories(dest);
    const std::uint64_t seed = g.seed.value_or(0);
    int failures = 0;
    for (const fs::path& model_path : models) {
        const std::string stem = model_path.stem().string();
        try {
            const Mesh mesh = read_obj(g.workspace.resolve(model_path));
            const ControlLattice lattice = build_lattice(mesh, opts.resolution);
            const Aabb cube = bounding_cube(mesh);
            const double stddev = opts.stddev.value_or(0.03 * (cube.max - cube.min).norm());
            const double input_error = reflection_error(mesh, lattice.mirror_x);
            for (int k = 0; k < opts.count; ++k) {
                Rng rng(stream_seed(seed, stem, static_cast<std::uint64_t>(k)));
                const DeformationField field = sample_deformation(lattice, stddev, rng);
                const Mesh deformed = apply_deformation(mesh, lattice, field);
                char name[32];
                std::snprintf(name, sizeof(name), "_%04d.obj", k);
                const fs::path file = dest / (stem + name);
                write_obj(file, deformed);
                log << file.filename().string() << ": field " << (is_symmetric(lattice, field) ? "symmetric" : "ASYMMETRIC")
                    << ", reflection error " << reflection_error(deformed, lattice.mirror_x) << " (input "
                    << input_error << ")\n";
            }
        } catch (const std::exception& e) {
            ++failures;
            log << model_path.string() << ": " << e.what() << '\n';
        }
    }
    return failures;
}

SynthJob parse_synth_config(const json& j, const GlobalOptions& g)
{
    Fields f(j, "config");
    SynthJob job;

    const json& models = f.raw("models");
    if (!models.is_array() || models.empty()) {
        throw InputError("config.models: expected a non-empty array");
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const std::string path = "config.models[" + std::to_string(i) + "]";
        Fields m(models[i], path);
        const fs::path file = m.get<std::string>("path");
        SourceModel src;
        src.category = m.get<std::string>("category");
        src.id = m.get<std::string>("id", file.stem().string());
        m.finish();
        if (src.category.empty() || src.id.empty()) {
            throw InputError(path + ": id and category must be non-empty");
        }
        if (!ids.insert(src.id).second) {
            throw InputError(path + ".id: duplicate model id '" + src.id + "'");
        }
        try {
            src.mesh = read_obj(g.workspace.resolve(file));
        } catch (const InputError& e) {
            throw InputError(path + ".path: " + e.what());
        }
        job.models.push_back(std::move(src));
    }

    SynthesisConfig& c = job.config;
    c.images_per_model = f.get<int>("images_per_model", c.images_per_model);
    c.offset_fraction = f.get<double>("offset_fraction", c.offset_fraction);
    c.master_seed = f.get<std::uint64_t>("seed", 0);
    if (g.seed) {
        c.master_seed = *g.seed;
    }
    c.jobs = g.jobs;
    if (f.has("render")) {
        c.render = parse_render(f.raw("render"), "config.render");
    }
    if (f.has("layout")) {
        c.layout = parse_layout(f.raw("layout"), "config.layout");
    }
    if (f.has("backgrounds")) {
        const fs::path dir = g.workspace.resolve(f.get<std::string>("backgrounds"));
        try {
            c.backgrounds = load_background_corpus(dir);
        } catch (const InputError& e) {
            throw InputError(std::string("config.backgrounds: ") + e.what());
        }
    }
    if (f.has("distributions")) {
        DistributionSet set;
        try {
            set = distributions_from_json(read_json_file(g.workspace.resolve(f.get<std::string>("distributions"))));
        } catch (const InputError& e) {
            throw InputError(std::string("config.distributions: ") + e.what());
        }
        std::string missing;
        for (const auto& m : job.models) {
            if (!set.count(m.category) && missing.find("'" + m.category + "'") == std::string::npos) {
                missing += (missing.empty() ? "'" : ", '") + m.category + "'";
            }
        }
        if (!missing.empty()) {
            throw InputError("config.distributions: no fitted distributions for " + missing);
        }
        c.camera_source = camera_models(set);
        for (const auto& [category, dist] : set) {
            c.crop_models[category] = dist.crop;
        }
    }
    job.output = g.workspace.resolve(f.get<std::string>("output"));
    f.finish();
    try {
        c.validate();
    } catch (const InputError& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return job;
}

DatasetManifest cmd_synth(const GlobalOptions& g, const fs::path& config_path, std::ostream& log)
{
    g.workspace.check();
    const auto start = std::chrono::steady_clock::now();
    const SynthJob job = parse_synth_config(read_json_file(g.workspace.resolve(config_path)), g);
    const DatasetManifest manifest = synthesize_dataset(job.models, job.config, job.output);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::map<std::string, std::size_t> per_category;
    for (const auto& r : manifest.records) {
        ++per_category[r.category];
    }
    log << "synthesized " << manifest.records.size() << " images into " << job.output.string() << '\n';
    for (const auto& [category, n] : per_category) {
        log << "  " << category << ": " << n << '\n';
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", seconds);
    log << "wall time " << buf << " s\n";
    return manifest;
}

TrainJob parse_train_config(const json& j, const GlobalOptions& g)
{
    Fields f(j, "train_config");
    TrainJob job;
    TrainConfig& c = job.config;
    c.learning_rate = f.get<double>("learning_rate", c.learning_rate);
    c.epochs = f.get<int>("epochs", c.epochs);
    c.batch_size = f.get<int>("batch_size", c.batch_size);
    c.seed = f.get<std::uint64_t>("seed", c.seed);
    if (g.seed) {
        c.seed = *g.seed;
    }
    c.sigma = f.get<double>("sigma", c.sigma);
    if (f.has("layout")) {
        c.layout = parse_layout(f.raw("layout"), "train_config.layout");
    }
    const std::string loss = f.get<std::string>("loss", "geometric");
    if (loss == "geometric") {
        c.loss = LossKind::geometric;
    } else if (loss == "cross_entropy") {
        c.loss = LossKind::cross_entropy;
    } else {
        throw InputError("train_config.loss: expected \"geometric\" or \"cross_entropy\"");
    }
    if (f.has("source_weights")) {
        const json& sw = f.raw("source_weights");
        if (!sw.is_object()) {
            throw InputError("train_config.source_weights: expected an object");
        }
        for (const auto& [source, w] : sw.items()) {
            c.source_weights[source] = Fields::convert<double>(w, "train_config.source_weights." + source);
        }
    }
    job.hidden = f.get<int>("hidden", job.hidden);
    job.input_side = f.get<int>("input_side", job.input_side);
    f.finish();
    if (job.hidden < 1 || job.input_side < 1) {
        throw InputError("train_config: hidden and input_side must be positive");
    }
    c.validate();
    return job;
}

TrainResult cmd_train(const GlobalOptions& g, const fs::path& manifest_path, const fs::path& train_config,
                      const fs::path& out_model, std::ostream& log)
{
    g.workspace.check();
    const fs::path manifest_file = g.workspace.resolve(manifest_path);
    const DatasetManifest manifest = manifest_from_json(read_json_file(manifest_file));
    if (manifest.records.empty()) {
        throw InputError("manifest has no records");
    }
    const json train_doc = read_json_file(g.workspace.resolve(train_config));
    TrainJob job = parse_train_config(train_doc, g);
    if (!train_doc.contains("layout")) {
        job.config.layout = manifest.layout; // default to the dataset's own binning
    }

    std::set<std::string> categories;
    for (const auto& r : manifest.records) {
        categories.insert(r.category);
    }
    ToyModel model = ToyModel::random({categories.begin(), categories.end()}, job.config.layout, job.config.seed,
                                      job.hidden, job.input_side);
    log << "training on " << manifest.records.size() << " images, " << categories.size() << " classes, "
        << model.parameter_count() << " parameters\n";
    const TrainResult result = train(model, manifest, manifest_file.parent_path(), job.config);
    log << "loss " << result.epoch_losses.front() << " -> " << result.epoch_losses.back() << '\n';

    const fs::path dest = g.workspace.resolve(out_model);
    ensure_parent(dest);
    json doc = model_to_json(model);
    doc["seed"] = job.config.seed;
    write_json_file(dest, doc);

    std::ostringstream csv;
    csv << "step,epoch,loss\n";
    const std::size_t steps_per_epoch = result.step_losses.size() / result.epoch_losses.size();
    for (std::size_t s = 0; s < result.step_losses.size(); ++s) {
        csv << s << ',' << s / steps_per_epoch << ',' << shortest(result.step_losses[s]) << '\n';
    }
    fs::path csv_path = dest;
    csv_path.replace_extension(".loss.csv");
    write_text(csv_path, csv.str());
    log << "wrote " << dest.string() << " and " << csv_path.string() << '\n';
    return result;
}

EvalReport cmd_eval(const GlobalOptions& g, const fs::path& detections, const fs::path& groundtruths,
                    const EvalOptions& options, const fs::path& out_dir, std::ostream& out, std::ostream& log)
{
    g.workspace.check();
    auto open = [&](const fs::path& p) {
        std::ifstream in(g.workspace.resolve(p));
        if (!in) {
            throw InputError("cannot open " + g.workspace.resolve(p).string());
        }
        return in;
    };
    std::ifstream det_in = open(detections);
    std::ifstream gt_in = open(groundtruths);
    const auto dets = read_detections(det_in);
    const auto gts = read_groundtruths(gt_in);
    const EvalReport report = evaluate(dets, gts, options);
    for (const auto& w : report.warnings) {
        log << "warning: " << w << '\n';
    }
    const fs::path dest = g.workspace.resolve(out_dir);
    fs::create_directories(dest);
    json doc = report_to_json(report);
    doc["seed"] = g.seed.value_or(0);
    write_json_file(dest / "report.json", doc);
    const std::string table = report_table(report);
    write_text(dest / "report.txt", table);
    write_text(dest / "curve.csv", curve_csv(report));
    out << table;
    log << "wrote report.json, report.txt and curve.csv to " << dest.string() << '\n';
    return report;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Synthetic viewpoint data generation, training and evaluation"};
    app.require_subcommand(1);

    GlobalOptions g;
    std::string workspace = ".";
    std::uint64_t seed = 0;
    g.jobs = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--workspace", workspace, "Workspace root; relative paths resolve against it");
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides config files)");
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* fit = app.add_subcommand("fit-dist", "Fit camera and crop distributions from annotations");
    std::string fit_in;
    std::string fit_out;
    std::vector<std::string> fit_categories;
    fit->add_option("annotations", fit_in, "JSON-lines annotations")->required();
    fit->add_option("out", fit_out, "Output distributions JSON")->required();
    fit->add_option("--categories", fit_categories, "Categories that must have records");

    auto* deform = app.add_subcommand("deform", "Write symmetric random deformations of OBJ models");
    std::vector<std::string> deform_models;
    std::string deform_out;
    DeformOptions deform_opts;
    double stddev = 0.0;
    deform->add_option("--out", deform_out, "Output directory")->required();
    deform->add_option("--count", deform_opts.count, "Deformed copies per model");
    auto* stddev_opt = deform->add_option("--stddev", stddev, "Translation stddev (default 3% of cube diagonal)");
    deform->add_option("--resolution", deform_opts.resolution, "Control points per axis");
    deform->add_option("models", deform_models, "OBJ files")->required();

    auto* synth = app.add_subcommand("synth", "Render a synthetic dataset");
    std::string synth_config;
    synth->add_option("config", synth_config, "Synthesis config JSON")->required();

    auto* trn = app.add_subcommand("train", "Train the toy viewpoint model");
    std::string train_manifest;
    std::string train_config;
    std::string train_out;
    trn->add_option("manifest", train_manifest, "Dataset manifest.json")->required();
    trn->add_option("config", train_config, "Training config JSON")->required();
    trn->add_option("out", train_out, "Output model JSON")->required();

    auto* ev = app.add_subcommand("eval", "Evaluate detections against ground truth");
    std::string eval_det;
    std::string eval_gt;
    std::string eval_out = "runs/eval";
    EvalOptions eval_opts;
    bool eleven = false;
    double delta_step = 1.0;
    ev->add_option("detections", eval_det, "Detections JSON lines")->required();
    ev->add_option("groundtruth", eval_gt, "Ground truth JSON lines")->required();
    ev->add_option("--out-dir", eval_out, "Directory for report.json, report.txt, curve.csv");
    ev->add_option("--nms-window", eval_opts.nms_window, "Odd NMS window in bins");
    ev->add_option("--top-k", eval_opts.top_k, "Proposals for top-k accuracy");
    ev->add_option("--delta-step", delta_step, "Accuracy curve spacing in degrees")->check(CLI::PositiveNumber);
    ev->add_flag("--eleven-point", eleven, "11-point interpolated AP");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        g.workspace.root = workspace;
        if (*seed_opt) {
            g.seed = seed;
        }
        if (*fit) {
            cmd_fit_dist(g, fit_in, fit_out, fit_categories, err);
        } else if (*deform) {
            if (*stddev_opt) {
                deform_opts.stddev = stddev;
            }
            std::vector<fs::path> paths(deform_models.begin(), deform_models.end());
            return cmd_deform(g, paths, deform_opts, deform_out, err) == 0 ? 0 : 1;
        } else if (*synth) {
            cmd_synth(g, synth_config, err);
        } else if (*trn) {
            cmd_train(g, train_manifest, train_config, train_out, err);
        } else if (*ev) {
            eval_opts.interpolation = eleven ? ApInterpolation::eleven_point : ApInterpolation::all_points;
            for (int i = 0; i * delta_step <= 180.0 + 1e-9; ++i) {
                eval_opts.delta_grid_deg.push_back(i * delta_step);
            }
            cmd_eval(g, eval_det, eval_gt, eval_opts, eval_out, out, err);
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"viewsynth"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace viewsynth
