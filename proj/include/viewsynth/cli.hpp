#pragma once

#include "viewsynth/evalkit.hpp"
#include "viewsynth/synthpipe.hpp"
#include "viewsynth/toytrainer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace viewsynth {

/// Workspace layout; relative paths given to any command resolve against root.
struct Workspace
{
    std::filesystem::path root = ".";

    std::filesystem::path models() const { return root / "models"; }
    std::filesystem::path backgrounds() const { return root / "backgrounds"; }
    std::filesystem::path annotations() const { return root / "annotations"; }
    std::filesystem::path datasets() const { return root / "datasets"; }
    std::filesystem::path runs() const { return root / "runs"; }

    std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : root / p; }
    /// Throws InputError unless root is an existing directory.
    void check() const;
};

struct GlobalOptions
{
    Workspace workspace;
    std::optional<std::uint64_t> seed; ///< overrides seeds in config files when set
    int jobs = 1;
};

/// Fits per-category distributions from JSON-lines annotations and writes them as JSON.
DistributionSet cmd_fit_dist(const GlobalOptions& g, const std::filesystem::path& annotations,
                             const std::filesystem::path& out, const std::vector<std::string>& required_categories,
                             std::ostream& log);

struct DeformOptions
{
    int count = 10;
    std::optional<double> stddev; ///< default: 3% of the bounding-cube diagonal
    int resolution = 4;
};

/// Writes count deformed copies of each model into out_dir. Returns the number
/// of input files that failed (each failure is reported on log).
int cmd_deform(const GlobalOptions& g, const std::vector<std::filesystem::path>& models, const DeformOptions& opts,
               const std::filesystem::path& out_dir, std::ostream& log);

/// Parsed synthesis config file; paths already resolved against the workspace.
struct SynthJob
{
    std::vector<SourceModel> models;
    SynthesisConfig config;
    std::filesystem::path output;
};

/// Validates the config document, reporting errors with field paths (InputError).
SynthJob parse_synth_config(const nlohmann::json& j, const GlobalOptions& g);

DatasetManifest cmd_synth(const GlobalOptions& g, const std::filesystem::path& config_path, std::ostream& log);

struct TrainJob
{
    TrainConfig config;
    int hidden = 64;
    int input_side = 32;
};

TrainJob parse_train_config(const nlohmann::json& j, const GlobalOptions& g);

/// Trains a fresh model on the manifest and writes it plus <out>.loss.csv. The
/// bin layout defaults to the manifest's when the config does not set one.
TrainResult cmd_train(const GlobalOptions& g, const std::filesystem::path& manifest,
                      const std::filesystem::path& train_config, const std::filesystem::path& out_model,
                      std::ostream& log);

/// Writes report.json, report.txt and curve.csv into out_dir.
EvalReport cmd_eval(const GlobalOptions& g, const std::filesystem::path& detections,
                    const std::filesystem::path& groundtruths, const EvalOptions& options,
                    const std::filesystem::path& out_dir, std::ostream& out, std::ostream& log);

/// Full command line entry point: 0 success, 1 input error, 2 internal error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace viewsynth
