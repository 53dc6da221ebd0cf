#pragma once

#include "viewsynth/box.hpp"
#include "viewsynth/image.hpp"
#include "viewsynth/mesh.hpp"
#include "viewsynth/paramsampler.hpp"
#include "viewsynth/renderer.hpp"
#include "viewsynth/viewgeom.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace viewsynth {

/**
 * Alpha-composites a render over a background. The background is tiled, and
 * output pixel (x, y) reads background pixel
 * (x + bg_w/2 - w/2 + offset_x, y + bg_h/2 - h/2 + offset_y), wrapped, so a
 * zero offset aligns the two image centers.
 */
RgbImage composite(const RgbaImage& foreground, const RgbImage& background, int offset_x, int offset_y);

/// Loads every PNG/JPEG in a directory, sorted by file name. Unreadable files
/// are skipped with a warning on stderr. Throws InputError if the directory is
/// missing or yields no usable image.
std::vector<RgbImage> load_background_corpus(const std::filesystem::path& dir);

struct SourceModel
{
    std::string id; ///< stable key for per-image random streams
    std::string category;
    Mesh mesh;
};

struct SynthesisConfig
{
    int images_per_model = 20;
    std::vector<RgbImage> backgrounds; ///< empty: composite over black
    std::map<std::string, CropPatternModel> crop_models; ///< empty: crop to the projected full box
    CameraSource camera_source = FallbackCamera{};
    std::uint64_t master_seed = 0;
    RenderConfig render;
    BinLayout layout;
    double offset_fraction = 0.25; ///< background offset uniform in +-fraction of each dimension
    int jobs = 1;

    void validate() const;
};

struct DatasetRecord
{
    std::string image; ///< path relative to the dataset directory
    std::string category;
    std::string model_id;
    int image_index = 0;
    ViewpointTuple viewpoint;
    ViewBins bins;
    double rho = 0.0;
    Box full_box;
    Box crop_box;
    std::uint64_t rng_stream = 0;
    std::string source = "synthetic";
};

struct DatasetManifest
{
    std::uint64_t master_seed = 0;
    BinLayout layout;
    std::vector<DatasetRecord> records;
};

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
/// Throws InputError on schema violations, naming the record index.
DatasetManifest manifest_from_json(const nlohmann::json& j);

/**
 * Renders images_per_model images per model into dataset_dir/images and
 * writes dataset_dir/manifest.json. Each image uses its own random stream
 * seeded from (master_seed, model id, image index) and draws, in order:
 * lighting, camera, background index, background offset, crop. Records are
 * ordered by (model order, image index), so the output does not depend on
 * config.jobs.
 */
DatasetManifest synthesize_dataset(const std::vector<SourceModel>& models, const SynthesisConfig& config,
                                   const std::filesystem::path& dataset_dir);

/// One object annotation used to fit camera and crop distributions.
struct Annotation
{
    std::string category;
    double rho = 0.0;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double inplane_deg = 0.0;
    Box full_box;
    Box gt_box;
};

/// JSON lines; blank lines are skipped. Throws InputError with the line number.
std::vector<Annotation> read_annotations(std::istream& in);
std::vector<Annotation> read_annotations(const std::filesystem::path& path);

/**
 * Fits rho/azimuth/elevation/in-plane KDEs and the four-edge crop model per
 * category. When required_categories is non-empty, every listed category must
 * have records; otherwise InputError lists the missing ones.
 */
DistributionSet estimate_distributions(const std::vector<Annotation>& annotations,
                                       const std::set<std::string>& required_categories = {});

} // namespace viewsynth
