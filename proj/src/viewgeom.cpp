#include "viewsynth/viewgeom.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace viewsynth {

double wrap_360(double deg)
{
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) {
        r += 360.0;
    }
    // fmod of a tiny negative value plus 360 rounds to 360.
    if (r >= 360.0) {
        r = 0.0;
    }
    return r;
}

double wrap_180(double deg)
{
    double r = wrap_360(deg + 180.0) - 180.0;
    if (r >= 180.0) {
        r = -180.0;
    }
    return r;
}

double wrap_pi(double rad)
{
    double r = std::remainder(rad, 2.0 * kPi);
    return std::clamp(r, -kPi, kPi);
}

ViewpointTuple::ViewpointTuple(double azimuth_deg, double elevation_deg, double inplane_deg)
{
    if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg) || !std::isfinite(inplane_deg)) {
        throw std::invalid_argument("viewpoint angles must be finite");
    }
    if (elevation_deg < -90.0 || elevation_deg > 90.0) {
        throw std::invalid_argument("elevation " + std::to_string(elevation_deg) + " outside [-90, 90]");
    }
    azimuth_ = wrap_360(azimuth_deg);
    elevation_ = elevation_deg;
    inplane_ = wrap_180(inplane_deg);
}

const char* to_string(AngleGroup group)
{
    switch (group) {
    case AngleGroup::azimuth:
        return "azimuth";
    case AngleGroup::elevation:
        return "elevation";
    case AngleGroup::inplane:
        return "inplane";
    }
    return "?";
}

BinLayout::BinLayout(int azimuth_bins, int elevation_bins, int inplane_bins)
    : counts_{azimuth_bins, elevation_bins, inplane_bins}
{
    for (const int c : counts_) {
        if (c <= 0) {
            throw std::invalid_argument("bin counts must be positive");
        }
    }
}

int BinLayout::offset(AngleGroup group) const
{
    switch (group) {
    case AngleGroup::azimuth:
        return 0;
    case AngleGroup::elevation:
        return counts_[0];
    case AngleGroup::inplane:
        return counts_[0] + counts_[1];
    }
    return 0;
}

double BinLayout::bin_width_deg(AngleGroup group) const
{
    return range_width_deg(group) / bins(group);
}

int ViewBins::operator[](AngleGroup group) const
{
    switch (group) {
    case AngleGroup::azimuth:
        return azimuth;
    case AngleGroup::elevation:
        return elevation;
    case AngleGroup::inplane:
        return inplane;
    }
    return 0;
}

double range_start_deg(AngleGroup group)
{
    switch (group) {
    case AngleGroup::azimuth:
        return 0.0;
    case AngleGroup::elevation:
        return -90.0;
    case AngleGroup::inplane:
        return -180.0;
    }
    return 0.0;
}

double range_width_deg(AngleGroup group)
{
    return group == AngleGroup::elevation ? 180.0 : 360.0;
}

int discretize_angle(double angle_deg, AngleGroup group, int bins)
{
    // (angle - start) * bins / range keeps bin edges exact for integer-degree widths.
    const double t = (angle_deg - range_start_deg(group)) * bins / range_width_deg(group);
    const int k = static_cast<int>(std::floor(t));
    return std::clamp(k, 0, bins - 1);
}

ViewBins discretize(const ViewpointTuple& v, const BinLayout& layout)
{
    return {discretize_angle(v.azimuth_deg(), AngleGroup::azimuth, layout.azimuth_bins()),
            discretize_angle(v.elevation_deg(), AngleGroup::elevation, layout.elevation_bins()),
            discretize_angle(v.inplane_deg(), AngleGroup::inplane, layout.inplane_bins())};
}

double bin_center_angle(int bin, AngleGroup group, int bins)
{
    if (bin < 0 || bin >= bins) {
        throw std::out_of_range(std::string(to_string(group)) + " bin " + std::to_string(bin) +
                                " outside [0, " + std::to_string(bins) + ")");
    }
    return range_start_deg(group) + (bin + 0.5) * range_width_deg(group) / bins;
}

ViewpointTuple bin_center(const ViewBins& bins, const BinLayout& layout)
{
    return {bin_center_angle(bins.azimuth, AngleGroup::azimuth, layout.azimuth_bins()),
            bin_center_angle(bins.elevation, AngleGroup::elevation, layout.elevation_bins()),
            bin_center_angle(bins.inplane, AngleGroup::inplane, layout.inplane_bins())};
}

namespace {

Eigen::Vector3d sphere_point(const ViewpointTuple& v)
{
    const double theta = deg2rad(v.azimuth_deg());
    const double phi = deg2rad(v.elevation_deg());
    return {std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta), std::sin(phi)};
}

} // namespace

double viewpoint_distance(const ViewpointTuple& a, const ViewpointTuple& b)
{
    const Eigen::Vector3d pa = sphere_point(a);
    const Eigen::Vector3d pb = sphere_point(b);
    const double spherical = std::atan2(pa.cross(pb).norm(), pa.dot(pb));
    const double roll = std::abs(wrap_pi(deg2rad(a.inplane_deg() - b.inplane_deg())));
    return spherical + roll;
}

RotationMatrix::RotationMatrix(const Eigen::Matrix3d& m) : m_(m)
{
    const double ortho_err = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho_err <= 1e-9) || !(std::abs(m.determinant() - 1.0) <= 1e-9)) {
        throw std::invalid_argument("matrix is not a proper rotation");
    }
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& other) const
{
    RotationMatrix r;
    r.m_ = m_ * other.m_;
    return r;
}

RotationMatrix RotationMatrix::transpose() const
{
    RotationMatrix r;
    r.m_ = m_.transpose();
    return r;
}

RotationMatrix RotationMatrix::axis_angle(const Eigen::Vector3d& axis, double angle_rad)
{
    const double n = axis.norm();
    if (!(n > 0.0)) {
        throw std::invalid_argument("rotation axis must be non-zero");
    }
    RotationMatrix r;
    r.m_ = Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix();
    return r;
}

RotationMatrix rotation_from_viewpoint(const ViewpointTuple& v)
{
    const Eigen::Matrix3d rz = Eigen::AngleAxisd(deg2rad(v.azimuth_deg()), Eigen::Vector3d::UnitZ()).toRotationMatrix();
    const Eigen::Matrix3d rx =
        Eigen::AngleAxisd(deg2rad(v.elevation_deg()), Eigen::Vector3d::UnitX()).toRotationMatrix();
    const Eigen::Matrix3d ry = Eigen::AngleAxisd(deg2rad(v.inplane_deg()), Eigen::Vector3d::UnitY()).toRotationMatrix();
    return RotationMatrix(ry * rx * rz);
}

double rotation_geodesic(const RotationMatrix& r1, const RotationMatrix& r2)
{
    const Eigen::Matrix3d rel = r1.matrix().transpose() * r2.matrix();
    // sin and cos of the rotation angle, from the skew and symmetric parts.
    const Eigen::Vector3d skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
    const double s = 0.5 * skew.norm();
    const double c = std::clamp(0.5 * (rel.trace() - 1.0), -1.0, 1.0);
    return std::atan2(s, c);
}

} // namespace viewsynth
