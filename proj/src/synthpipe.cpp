#include "viewsynth/synthpipe.hpp"

#include "viewsynth/errors.hpp"
#include "viewsynth/json_io.hpp"
#include "viewsynth/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace viewsynth {

namespace {

int floor_mod(int a, int m)
{
    const int r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

RgbImage composite(const RgbaImage& foreground, const RgbImage& background, int offset_x, int offset_y)
{
    if (background.width < 1 || background.height < 1) {
        throw std::invalid_argument("background image is empty");
    }
    const int w = foreground.width;
    const int h = foreground.height;
    const int base_x = background.width / 2 - w / 2 + offset_x;
    const int base_y = background.height / 2 - h / 2 + offset_y;
    RgbImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int by = floor_mod(y + base_y, background.height);
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* fg = foreground.at(x, y);
            const std::uint8_t* bg = background.at(floor_mod(x + base_x, background.width), by);
            std::uint8_t* o = out.at(x, y);
            const int a = fg[3];
            for (int c = 0; c < 3; ++c) {
                o[c] = static_cast<std::uint8_t>((a * fg[c] + (255 - a) * bg[c] + 127) / 255);
            }
        }
    }
    return out;
}

std::vector<RgbImage> load_background_corpus(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) {
        throw InputError("background corpus " + dir.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RgbImage> corpus;
    for (const auto& f : files) {
        try {
            RgbImage img = read_rgb(f);
            if (img.width < 1 || img.height < 1) {
                throw InputError("empty image " + f.string());
            }
            corpus.push_back(std::move(img));
        } catch (const InputError& e) {
            std::cerr << "warning: skipping background " << f.string() << ": " << e.what() << '\n';
        }
    }
    if (corpus.empty()) {
        throw InputError("background corpus " + dir.string() + " has no readable PNG/JPEG images");
    }
    return corpus;
}

void SynthesisConfig::validate() const
{
    if (images_per_model < 1) {
        throw InputError("images_per_model must be at least 1");
    }
    if (!(offset_fraction >= 0.0)) {
        throw InputError("offset_fraction must be non-negative");
    }
    if (jobs < 1) {
        throw InputError("jobs must be at least 1");
    }
    render.validate();
}

nlohmann::json manifest_to_json(const DatasetManifest& manifest)
{
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : manifest.records) {
        records.push_back({
            {"image", r.image},
            {"category", r.category},
            {"model_id", r.model_id},
            {"image_index", r.image_index},
            {"viewpoint", r.viewpoint},
            {"bins", r.bins},
            {"rho", r.rho},
            {"full_box", r.full_box},
            {"crop_box", r.crop_box},
            {"rng_stream", r.rng_stream},
            {"source", r.source},
        });
    }
    return {{"format", "viewsynth-manifest"},
            {"version", 1},
            {"master_seed", manifest.master_seed},
            {"layout", manifest.layout},
            {"records", records}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j)
{
    DatasetManifest m;
    try {
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.layout = j.at("layout").get<BinLayout>();
    } catch (const std::exception& e) {
        throw InputError(std::string("manifest header: ") + e.what());
    }
    const auto& records = j.at("records");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        try {
            DatasetRecord rec;
            rec.image = r.at("image").get<std::string>();
            rec.category = r.at("category").get<std::string>();
            rec.model_id = r.value("model_id", std::string{});
            rec.image_index = r.value("image_index", 0);
            rec.viewpoint = r.at("viewpoint").get<ViewpointTuple>();
            rec.bins = r.at("bins").get<ViewBins>();
            rec.rho = r.value("rho", 0.0);
            if (r.contains("full_box")) {
                rec.full_box = r.at("full_box").get<Box>();
            }
            if (r.contains("crop_box")) {
                rec.crop_box = r.at("crop_box").get<Box>();
            }
            rec.rng_stream = r.value("rng_stream", std::uint64_t{0});
            rec.source = r.value("source", std::string("synthetic"));
            m.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw InputError("manifest record " + std::to_string(i) + ": " + e.what());
        }
    }
    return m;
}

namespace {

struct ImageJob
{
    std::size_t model = 0;
    int index = 0;
};

std::string image_name(const std::string& model_id, int index)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", index);
    return model_id + "_" + buf + ".png";
}

DatasetRecord synthesize_one(const SourceModel& model, const Mesh& mesh, int index, const SynthesisConfig& config,
                             const std::filesystem::path& image_dir)
{
    const std::uint64_t stream = stream_seed(config.master_seed, model.id, static_cast<std::uint64_t>(index));
    Rng rng(stream);

    const LightConfig lights = sample_lighting(rng);
    const CameraParams camera = sample_camera(config.camera_source, model.category, rng);
    const Render render = rasterize(mesh, camera, lights, config.render);
    const Box full = project_full_bbox(mesh, camera, config.render);

    const int w = config.render.width;
    const int h = config.render.height;
    const int max_dx = static_cast<int>(std::floor(config.offset_fraction * w));
    const int max_dy = static_cast<int>(std::floor(config.offset_fraction * h));
    const std::size_t n_bg = std::max<std::size_t>(config.backgrounds.size(), 1);
    const std::size_t bg_index = std::uniform_int_distribution<std::size_t>(0, n_bg - 1)(rng);
    const int dx = std::uniform_int_distribution<int>(-max_dx, max_dx)(rng);
    const int dy = std::uniform_int_distribution<int>(-max_dy, max_dy)(rng);

    static const RgbImage black(1, 1);
    const RgbImage& bg = config.backgrounds.empty() ? black : config.backgrounds[bg_index];
    const RgbImage composed = composite(render.image, bg, dx, dy);

    Box crop_box = full;
    if (!config.crop_models.empty()) {
        const auto it = config.crop_models.find(model.category);
        if (it == config.crop_models.end()) {
            throw InputError("no crop model for category '" + model.category + "'");
        }
        crop_box = sample_crop(it->second, full, w, h, rng);
    }
    const int x0 = static_cast<int>(std::floor(crop_box.left));
    const int y0 = static_cast<int>(std::floor(crop_box.top));
    const int x1 = static_cast<int>(std::ceil(crop_box.right));
    const int y1 = static_cast<int>(std::ceil(crop_box.bottom));
    const RgbImage cropped = crop(composed, x0, y0, x1, y1);

    DatasetRecord rec;
    rec.image = "images/" + image_name(model.id, index);
    write_png(image_dir / image_name(model.id, index), cropped);
    rec.category = model.category;
    rec.model_id = model.id;
    rec.image_index = index;
    rec.viewpoint = render.label;
    rec.bins = discretize(render.label, config.layout);
    rec.rho = camera.rho;
    rec.full_box = full;
    rec.crop_box = crop_box;
    rec.rng_stream = stream;
    return rec;
}

} // namespace

DatasetManifest synthesize_dataset(const std::vector<SourceModel>& models, const SynthesisConfig& config,
                                   const std::filesystem::path& dataset_dir)
{
    config.validate();
    if (models.empty()) {
        throw InputError("no models to synthesize from");
    }
    std::vector<Mesh> meshes;
    meshes.reserve(models.size());
    for (const auto& m : models) {
        if (m.mesh.empty()) {
            throw InputError("model '" + m.id + "' has no vertices");
        }
        meshes.push_back(normalize_mesh(m.mesh));
    }

    const std::filesystem::path image_dir = dataset_dir / "images";
    std::filesystem::create_directories(image_dir);

    std::vector<ImageJob> jobs;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        for (int k = 0; k < config.images_per_model; ++k) {
            jobs.push_back({mi, k});
        }
    }

    std::vector<DatasetRecord> records(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                records[j] = synthesize_one(models[jobs[j].model], meshes[jobs[j].model], jobs[j].index, config,
                                            image_dir);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const int n_threads = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    // Report the first failure in job order so errors are deterministic too.
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    DatasetManifest manifest;
    manifest.master_seed = config.master_seed;
    manifest.layout = config.layout;
    manifest.records = std::move(records);
    write_json_file(dataset_dir / "manifest.json", manifest_to_json(manifest));
    return manifest;
}

std::vector<Annotation> read_annotations(std::istream& in)
{
    std::vector<Annotation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            Annotation a;
            a.category = j.at("category").get<std::string>();
            a.rho = j.at("rho").get<double>();
            a.azimuth_deg = j.at("azimuth_deg").get<double>();
            a.elevation_deg = j.at("elevation_deg").get<double>();
            a.inplane_deg = j.at("inplane_deg").get<double>();
            a.full_box = j.at("full_box").get<Box>();
            a.gt_box = j.at("gt_box").get<Box>();
            if (!(a.rho > 0.0)) {
                throw InputError("rho must be positive");
            }
            if (a.elevation_deg < -90.0 || a.elevation_deg > 90.0) {
                throw InputError("elevation_deg outside [-90, 90]");
            }
            if (!a.full_box.valid()) {
                throw InputError("full_box must have positive width and height");
            }
            out.push_back(std::move(a));
        } catch (const std::exception& e) {
            throw InputError("annotation line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open annotations " + path.string());
    }
    try {
        return read_annotations(in);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

DistributionSet estimate_distributions(const std::vector<Annotation>& annotations,
                                       const std::set<std::string>& required_categories)
{
    std::map<std::string, std::vector<const Annotation*>> by_category;
    for (const auto& a : annotations) {
        by_category[a.category].push_back(&a);
    }
    std::string missing;
    for (const auto& c : required_categories) {
        if (!by_category.contains(c)) {
            missing += (missing.empty() ? "" : ", ") + c;
        }
    }
    if (!missing.empty()) {
        throw InputError("no annotation records for categories: " + missing);
    }
    if (by_category.empty()) {
        throw InputError("no records");
    }

    DistributionSet set;
    for (const auto& [category, recs] : by_category) {
        std::vector<double> rho, azimuth, elevation, inplane;
        std::vector<std::pair<Box, Box>> boxes;
        for (const Annotation* a : recs) {
            rho.push_back(a->rho);
            azimuth.push_back(a->azimuth_deg);
            elevation.push_back(a->elevation_deg);
            inplane.push_back(wrap_180(a->inplane_deg));
            boxes.emplace_back(a->full_box, a->gt_box);
        }
        CategoryDistributions dist;
        dist.camera.rho = fit_kde(rho, false);
        dist.camera.azimuth = fit_kde(azimuth, true);
        dist.camera.elevation = fit_kde(elevation, false);
        dist.camera.inplane = fit_kde(inplane, false);
        dist.crop = fit_crop_model(boxes);
        dist.record_count = recs.size();
        set.emplace(category, std::move(dist));
    }
    return set;
}

} // namespace viewsynth
