#include "viewsynth/paramsampler.hpp"

#include "viewsynth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace viewsynth {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
// Shifted copies used by circular density/cdf. Copies beyond +-720 contribute
// nothing measurable for bandwidths below 100 degrees.
constexpr int kCircularCopies = 2;
constexpr int kMaxRejections = 1'000'000;

double sample_stddev(std::span<const double> xs)
{
    if (xs.size() < 2) {
        return 0.0;
    }
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0.0;
    for (const double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / (xs.size() - 1));
}

double circular_stddev_deg(std::span<const double> xs)
{
    double c = 0.0;
    double s = 0.0;
    for (const double x : xs) {
        c += std::cos(deg2rad(x));
        s += std::sin(deg2rad(x));
    }
    const double r = std::hypot(c, s) / xs.size();
    // Uniform spread on the circle: cap at the std of U[0, 360).
    const double cap = 360.0 / std::sqrt(12.0);
    if (!(r > 0.0)) {
        return cap;
    }
    return std::min(cap, rad2deg(std::sqrt(std::max(0.0, -2.0 * std::log(std::min(r, 1.0))))));
}

} // namespace

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

Kde1D::Kde1D(std::vector<double> samples, double bandwidth, bool circular)
    : samples_(std::move(samples)), bandwidth_(bandwidth), circular_(circular)
{
    if (samples_.empty()) {
        throw std::invalid_argument("KDE needs at least one sample");
    }
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
        throw std::invalid_argument("KDE bandwidth must be positive");
    }
    for (double& x : samples_) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("KDE samples must be finite");
        }
        if (circular_) {
            x = wrap_360(x);
        }
    }
}

double Kde1D::density(double x) const
{
    const double h = bandwidth_;
    double sum = 0.0;
    if (circular_) {
        x = wrap_360(x);
        for (const double xi : samples_) {
            for (int k = -kCircularCopies; k <= kCircularCopies; ++k) {
                const double z = (x - xi - 360.0 * k) / h;
                sum += std::exp(-0.5 * z * z);
            }
        }
    } else {
        for (const double xi : samples_) {
            const double z = (x - xi) / h;
            sum += std::exp(-0.5 * z * z);
        }
    }
    return sum * kInvSqrt2Pi / (h * samples_.size());
}

double Kde1D::cdf(double x) const
{
    const double h = bandwidth_;
    double sum = 0.0;
    if (circular_) {
        x = std::clamp(x, 0.0, 360.0);
        for (const double xi : samples_) {
            for (int k = -kCircularCopies; k <= kCircularCopies; ++k) {
                const double shift = xi + 360.0 * k;
                sum += normal_cdf((x - shift) / h) - normal_cdf(-shift / h);
            }
        }
    } else {
        for (const double xi : samples_) {
            sum += normal_cdf((x - xi) / h);
        }
    }
    return sum / samples_.size();
}

Kde1D fit_kde(std::span<const double> samples, bool circular)
{
    if (samples.empty()) {
        throw std::invalid_argument("cannot fit a KDE to an empty sample set");
    }
    std::vector<double> xs(samples.begin(), samples.end());
    for (double& x : xs) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("KDE samples must be finite");
        }
        if (circular) {
            x = wrap_360(x);
        }
    }
    const double spread = circular ? circular_stddev_deg(xs) : sample_stddev(xs);
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    const double range = *hi - *lo;
    const double floor = 1e-6 * (range > 0.0 ? range : 1.0);
    const double h = 1.06 * spread * std::pow(static_cast<double>(xs.size()), -0.2);
    return {std::move(xs), std::max(h, floor), circular};
}

double kde_sample(const Kde1D& model, Rng& rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, model.samples().size() - 1);
    std::normal_distribution<double> noise(0.0, model.bandwidth());
    const double x = model.samples()[pick(rng)] + noise(rng);
    return model.circular() ? wrap_360(x) : x;
}

double TruncatedNormal::acceptance() const
{
    return normal_cdf((upper - mean) / stddev) - normal_cdf((lower - mean) / stddev);
}

double TruncatedNormal::sample(Rng& rng) const
{
    std::normal_distribution<double> normal(mean, stddev);
    for (int i = 0; i < kMaxRejections; ++i) {
        const double x = normal(rng);
        if (x >= lower && x <= upper) {
            return x;
        }
    }
    throw std::runtime_error("truncated normal rejection sampling did not terminate");
}

LightConfig sample_lighting(Rng& rng)
{
    std::uniform_int_distribution<int> count(1, kMaxLights);
    std::uniform_real_distribution<double> sin_lat(0.0, std::sin(deg2rad(kLightMaxLatitudeDeg)));
    std::uniform_real_distribution<double> lon(0.0, 2.0 * kPi);

    LightConfig config;
    config.ambient = true;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        const double s = sin_lat(rng);
        const double c = std::sqrt(1.0 - s * s);
        const double l = lon(rng);
        PointLight light;
        light.position = kLightRadius * Eigen::Vector3d(c * std::cos(l), c * std::sin(l), s);
        light.energy = kLightEnergy.sample(rng);
        config.lights.push_back(light);
    }
    return config;
}

void CameraParams::validate() const
{
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw std::invalid_argument("camera distance rho must be positive");
    }
}

namespace {

double sample_in(const Kde1D& model, double lower, double upper, Rng& rng)
{
    for (int i = 0; i < kMaxRejections; ++i) {
        const double x = kde_sample(model, rng);
        if (x > lower && x <= upper) {
            return x;
        }
    }
    throw std::runtime_error("KDE has no mass inside the parameter domain");
}

} // namespace

CameraParams sample_camera(const CameraSource& source, const std::string& category, Rng& rng)
{
    CameraParams params;
    if (const auto* fallback = std::get_if<FallbackCamera>(&source)) {
        std::uniform_real_distribution<double> azimuth(0.0, 360.0);
        std::normal_distribution<double> inplane(0.0, fallback->inplane_stddev);
        params.rho = fallback->rho.sample(rng);
        const double phi = fallback->elevation.sample(rng);
        const double theta = azimuth(rng);
        const double psi = inplane(rng);
        params.view = ViewpointTuple(theta, phi, psi);
        return params;
    }
    const auto& models = std::get<CameraKdeSet>(source);
    const auto it = models.find(category);
    if (it == models.end()) {
        throw std::invalid_argument("no camera distribution for category '" + category + "'");
    }
    const CameraKde& kde = it->second;
    params.rho = sample_in(kde.rho, 0.0, std::numeric_limits<double>::infinity(), rng);
    const double theta = kde_sample(kde.azimuth, rng);
    // Elevation is closed at both ends; -90 is accepted via nextafter.
    const double phi = sample_in(kde.elevation, std::nextafter(-90.0, -91.0), 90.0, rng);
    const double psi = kde_sample(kde.inplane, rng);
    params.view = ViewpointTuple(theta, phi, psi);
    return params;
}

std::array<double, 4> relative_edge_offsets(const Box& full, const Box& gt)
{
    const double w = full.width();
    const double h = full.height();
    if (!(w > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("full box must have positive width and height");
    }
    return {(gt.left - full.left) / w, (gt.right - full.right) / w, (gt.top - full.top) / h,
            (gt.bottom - full.bottom) / h};
}

CropPatternModel fit_crop_model(std::span<const std::pair<Box, Box>> full_and_gt)
{
    if (full_and_gt.empty()) {
        throw std::invalid_argument("crop model needs at least one box pair");
    }
    std::array<std::vector<double>, 4> offsets;
    for (const auto& [full, gt] : full_and_gt) {
        const auto rel = relative_edge_offsets(full, gt);
        for (std::size_t e = 0; e < 4; ++e) {
            offsets[e].push_back(rel[e]);
        }
    }
    CropPatternModel model;
    for (std::size_t e = 0; e < 4; ++e) {
        model.edges[e] = fit_kde(offsets[e], false);
    }
    return model;
}

namespace {

std::pair<double, double> clamp_axis(double lo, double hi, double full_lo, double full_hi, double size)
{
    if (lo > hi) {
        std::swap(lo, hi);
    }
    lo = std::clamp(lo, 0.0, size);
    hi = std::clamp(hi, 0.0, size);
    if (full_hi > full_lo) {
        const double mid = 0.5 * (full_lo + full_hi);
        if (lo >= full_hi) {
            lo = mid;
        }
        if (hi <= full_lo) {
            hi = mid;
        }
    }
    const double min_side = std::min(kMinCropSide, size);
    if (hi - lo < min_side) {
        // The grown interval contains the old one, so overlap survives the shift below.
        const double c = 0.5 * (lo + hi);
        lo = c - 0.5 * min_side;
        hi = c + 0.5 * min_side;
        if (lo < 0.0) {
            hi -= lo;
            lo = 0.0;
        }
        if (hi > size) {
            lo -= hi - size;
            hi = size;
        }
        // Rounding in the recentering can leave the side an ulp short.
        while (hi - lo < min_side) {
            if (hi < size) {
                hi = std::min(size, std::nextafter(hi, size));
            } else {
                lo = std::max(0.0, std::nextafter(lo, 0.0));
            }
        }
    }
    return {lo, hi};
}

} // namespace

Box sample_crop(const CropPatternModel& model, const Box& full_box, double image_width, double image_height,
                Rng& rng)
{
    const double w = full_box.width();
    const double h = full_box.height();
    const double left = full_box.left + kde_sample(model.edge(BoxEdge::left), rng) * w;
    const double right = full_box.right + kde_sample(model.edge(BoxEdge::right), rng) * w;
    const double top = full_box.top + kde_sample(model.edge(BoxEdge::top), rng) * h;
    const double bottom = full_box.bottom + kde_sample(model.edge(BoxEdge::bottom), rng) * h;

    const Box visible = intersect(full_box, Box{0.0, 0.0, image_width, image_height});
    const auto [l, r] = clamp_axis(left, right, visible.left, visible.right, image_width);
    const auto [t, b] = clamp_axis(top, bottom, visible.top, visible.bottom, image_height);
    return {l, t, r, b};
}

CameraKdeSet camera_models(const DistributionSet& set)
{
    CameraKdeSet out;
    for (const auto& [category, dist] : set) {
        out.emplace(category, dist.camera);
    }
    return out;
}

void to_json(nlohmann::json& j, const Kde1D& kde)
{
    j = nlohmann::json{{"samples", kde.samples()}, {"bandwidth", kde.bandwidth()}, {"circular", kde.circular()}};
}

void from_json(const nlohmann::json& j, Kde1D& kde)
{
    kde = Kde1D(j.at("samples").get<std::vector<double>>(), j.at("bandwidth").get<double>(),
                j.at("circular").get<bool>());
}

namespace {

constexpr std::array<const char*, 4> kEdgeNames{"left", "right", "top", "bottom"};

} // namespace

nlohmann::json distributions_to_json(const DistributionSet& set)
{
    nlohmann::json categories = nlohmann::json::object();
    for (const auto& [category, dist] : set) {
        nlohmann::json crop = nlohmann::json::object();
        for (std::size_t e = 0; e < 4; ++e) {
            crop[kEdgeNames[e]] = dist.crop.edges[e];
        }
        categories[category] = {
            {"record_count", dist.record_count},
            {"rho", dist.camera.rho},
            {"azimuth", dist.camera.azimuth},
            {"elevation", dist.camera.elevation},
            {"inplane", dist.camera.inplane},
            {"crop", crop},
        };
    }
    return {{"format", "viewsynth-distributions"}, {"version", 1}, {"categories", categories}};
}

DistributionSet distributions_from_json(const nlohmann::json& j)
{
    DistributionSet set;
    try {
        for (const auto& [category, c] : j.at("categories").items()) {
            CategoryDistributions dist;
            dist.record_count = c.value("record_count", std::size_t{0});
            dist.camera.rho = c.at("rho").get<Kde1D>();
            dist.camera.azimuth = c.at("azimuth").get<Kde1D>();
            dist.camera.elevation = c.at("elevation").get<Kde1D>();
            dist.camera.inplane = c.at("inplane").get<Kde1D>();
            for (std::size_t e = 0; e < 4; ++e) {
                dist.crop.edges[e] = c.at("crop").at(kEdgeNames[e]).get<Kde1D>();
            }
            set.emplace(category, std::move(dist));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("distribution file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("distribution file: ") + e.what());
    }
    return set;
}

} // namespace viewsynth
