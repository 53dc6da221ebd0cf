#pragma once

#include "viewsynth/geomloss.hpp"
#include "viewsynth/image.hpp"
#include "viewsynth/synthpipe.hpp"
#include "viewsynth/viewgeom.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace viewsynth {

/**
 * Shared ReLU trunk over downsampled grayscale pixels, followed by one linear
 * viewpoint head per class. All parameters live in one flat array:
 *
 *   trunk weights (hidden x inputs, row-major), trunk bias (hidden),
 *   then per class: head weights (bins x hidden, row-major), head bias (bins)
 *
 * where bins = layout.total_bins() and the head rows are ordered azimuth,
 * elevation, in-plane.
 */
struct ToyModel
{
    int input_side = 32;
    int hidden = 64;
    BinLayout layout;
    std::vector<std::string> classes;
    std::vector<double> params;

    static ToyModel zeros(std::vector<std::string> classes, const BinLayout& layout, int hidden = 64,
                          int input_side = 32);
    /// Uniform fan-in scaled initialization from a seeded stream.
    static ToyModel random(std::vector<std::string> classes, const BinLayout& layout, std::uint64_t seed,
                           int hidden = 64, int input_side = 32);

    int num_classes() const { return static_cast<int>(classes.size()); }
    int inputs() const { return input_side * input_side; }
    int head_outputs() const { return layout.total_bins(); }
    std::size_t trunk_size() const;
    std::size_t head_size() const;
    std::size_t head_offset(int class_id) const;
    std::size_t parameter_count() const;
    /// Throws std::out_of_range for unknown names.
    int class_id(const std::string& name) const;
};

/// Grayscale in [-0.5, 0.5], box-filtered to side x side.
std::vector<double> image_features(const RgbImage& image, int side);

/// Logits split per angle group (azimuth, elevation, in-plane).
using GroupLogits = std::array<std::vector<double>, 3>;

/// Throws std::invalid_argument on a feature size mismatch, std::out_of_range on an unknown class.
GroupLogits forward(const ToyModel& model, std::span<const double> features, int class_id);

struct Prediction
{
    ViewpointTuple viewpoint; ///< bin centers of the per-group argmax
    ViewBins bins;
    std::array<std::vector<double>, 3> probabilities;
};

/// Argmax ties resolve to the lowest bin.
Prediction predict(const ToyModel& model, std::span<const double> features, int class_id);

enum class LossKind { geometric, cross_entropy };

struct TrainSample
{
    std::vector<double> features;
    int class_id = 0;
    ViewBins gt;
    double weight = 1.0;
};

struct LossSpec
{
    LossKind kind = LossKind::geometric;
    LossConfig config;
};

struct ModelGradient
{
    double loss = 0.0;
    std::vector<double> grad; ///< same layout as ToyModel::params
};

/// Mean over the batch of the weighted per-sample loss (summed over angle groups) and its full gradient.
ModelGradient model_gradient(const ToyModel& model, std::span<const TrainSample> batch, const LossSpec& loss);

struct TrainConfig
{
    double learning_rate = 0.05;
    int epochs = 20;
    int batch_size = 16;
    std::uint64_t seed = 0;
    double sigma = 1.0;
    BinLayout layout;
    LossKind loss = LossKind::geometric;
    std::map<std::string, double> source_weights; ///< per DatasetRecord::source; missing sources weigh 1.0

    void validate() const;
};

struct TrainResult
{
    std::vector<double> step_losses;  ///< batch loss before each update
    std::vector<double> epoch_losses; ///< mean of step_losses per epoch
};

/**
 * Plain mini-batch SGD. Each epoch visits the samples in an order shuffled
 * from a stream seeded by (seed, epoch). Updates touch only the heads that
 * appear in the batch, so other classes' parameters stay bit-identical.
 */
TrainResult train(ToyModel& model, std::span<const TrainSample> samples, const TrainConfig& config);

/// Reads every manifest image and labels it with the model's class ids.
/// Throws InputError naming the file when an image fails to decode.
std::vector<TrainSample> load_samples(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                                      const ToyModel& model, const std::map<std::string, double>& source_weights = {});

TrainResult train(ToyModel& model, const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                  const TrainConfig& config);

nlohmann::json model_to_json(const ToyModel& model);
/// Throws InputError on schema violations.
ToyModel model_from_json(const nlohmann::json& j);

} // namespace viewsynth
