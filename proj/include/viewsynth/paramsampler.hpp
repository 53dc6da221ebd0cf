#pragma once

#include "viewsynth/box.hpp"
#include "viewsynth/rng.hpp"
#include "viewsynth/viewgeom.hpp"

#include <Eigen/Core>
#include "json.hpp"

#include <array>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace viewsynth {

double normal_cdf(double z);

/**
 * One-dimensional Gaussian kernel density estimate. Circular models live on
 * [0, 360): samples are canonicalized and density/cdf sum over copies of the
 * samples shifted by multiples of 360 degrees.
 */
class Kde1D
{
public:
    Kde1D() = default;
    Kde1D(std::vector<double> samples, double bandwidth, bool circular);

    const std::vector<double>& samples() const { return samples_; }
    double bandwidth() const { return bandwidth_; }
    bool circular() const { return circular_; }

    double density(double x) const;
    /// Non-circular: P(X <= x). Circular: P(X in [0, x)) for x in [0, 360].
    double cdf(double x) const;

    friend bool operator==(const Kde1D&, const Kde1D&) = default;

private:
    std::vector<double> samples_;
    double bandwidth_ = 1.0;
    bool circular_ = false;
};

/**
 * Gaussian KDE with Silverman's bandwidth h = 1.06 * s * n^(-1/5), floored at
 * 1e-6 * (sample range, or 1 when all samples coincide). s is the sample
 * standard deviation, or the circular standard deviation for circular data.
 * Throws std::invalid_argument on an empty or non-finite sample set.
 */
Kde1D fit_kde(std::span<const double> samples, bool circular);

/// Uniformly chosen stored sample plus N(0, h^2) noise; circular draws wrap into [0, 360).
double kde_sample(const Kde1D& model, Rng& rng);

/// Normal N(mean, stddev^2) restricted to [lower, upper], sampled by rejection.
struct TruncatedNormal
{
    double mean = 0.0;
    double stddev = 1.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    /// Probability that one untruncated draw is accepted.
    double acceptance() const;
    double sample(Rng& rng) const;
};

inline constexpr double kLightRadius = 14.14;
inline constexpr int kMaxLights = 10;
inline constexpr double kLightMaxLatitudeDeg = 60.0;
inline constexpr TruncatedNormal kLightEnergy{4.0, 3.0, 0.0};

struct PointLight
{
    Eigen::Vector3d position = Eigen::Vector3d::Zero(); ///< world frame, z up
    double energy = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Ones(); ///< always white
};

struct LightConfig
{
    std::vector<PointLight> lights;
    bool ambient = true;
};

/// N ~ U{1..10} point lights, area-uniform on the radius-14.14 sphere between
/// latitude 0 and 60 degrees, energy ~ N(4, 3^2) truncated at 0.
LightConfig sample_lighting(Rng& rng);

inline constexpr double kFocalLength = 35.0;
inline constexpr double kAspectRatio = 1.0;

struct CameraParams
{
    double rho = 1.0; ///< optical center distance to the origin, model units
    ViewpointTuple view;
    double focal = kFocalLength;
    double aspect = kAspectRatio;

    void validate() const;
};

/// Per-category independent 1-D models; azimuth is circular.
struct CameraKde
{
    Kde1D rho;
    Kde1D azimuth;
    Kde1D elevation;
    Kde1D inplane;
};

/// Parametric distributions used when no fitted models are available.
struct FallbackCamera
{
    TruncatedNormal rho{7.0, 3.0, 6.0};
    TruncatedNormal elevation{15.0, 15.0, -10.0, 90.0};
    double inplane_stddev = 5.0;
};

using CameraKdeSet = std::map<std::string, CameraKde>;
using CameraSource = std::variant<FallbackCamera, CameraKdeSet>;

/**
 * Draws camera parameters for a category. KDE draws outside the valid domain
 * (rho <= 0, |elevation| > 90) are rejected and redrawn. Throws
 * std::invalid_argument when a KDE source lacks the category.
 */
CameraParams sample_camera(const CameraSource& source, const std::string& category, Rng& rng);

enum class BoxEdge { left = 0, right = 1, top = 2, bottom = 3 };

/// One KDE per box edge over (gt_edge - full_edge) / full_extent.
struct CropPatternModel
{
    std::array<Kde1D, 4> edges;

    const Kde1D& edge(BoxEdge e) const { return edges[static_cast<std::size_t>(e)]; }
};

/// Relative edge offsets (left, right, top, bottom) of gt w.r.t. full.
std::array<double, 4> relative_edge_offsets(const Box& full, const Box& gt);

/// Throws std::invalid_argument for no pairs or a full box without positive extent.
CropPatternModel fit_crop_model(std::span<const std::pair<Box, Box>> full_and_gt);

inline constexpr double kMinCropSide = 8.0;

/**
 * Applies sampled relative offsets to full_box, then clamps: the crop stays in
 * [0, image_width] x [0, image_height], overlaps full_box (itself clipped to
 * the image) with positive area, and is at least kMinCropSide wide and tall.
 */
Box sample_crop(const CropPatternModel& model, const Box& full_box, double image_width, double image_height,
                Rng& rng);

/// Distributions fitted for one category.
struct CategoryDistributions
{
    CameraKde camera;
    CropPatternModel crop;
    std::size_t record_count = 0;
};

using DistributionSet = std::map<std::string, CategoryDistributions>;

CameraKdeSet camera_models(const DistributionSet& set);

void to_json(nlohmann::json& j, const Kde1D& kde);
void from_json(const nlohmann::json& j, Kde1D& kde);
nlohmann::json distributions_to_json(const DistributionSet& set);
/// Throws InputError on schema violations.
DistributionSet distributions_from_json(const nlohmann::json& j);

} // namespace viewsynth
