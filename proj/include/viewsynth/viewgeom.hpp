#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>

namespace viewsynth {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into [0, 360).
double wrap_360(double deg);
/// Wraps an angle into [-180, 180).
double wrap_180(double deg);
/// Wraps an angle in radians into [-pi, pi].
double wrap_pi(double rad);

/**
 * Continuous viewpoint (azimuth, elevation, in-plane rotation) in degrees.
 *
 * Azimuth is stored in [0, 360), in-plane in [-180, 180). Elevation must lie
 * in [-90, 90]; anything else (or a non-finite angle) throws
 * std::invalid_argument.
 */
class ViewpointTuple
{
public:
    ViewpointTuple() = default;
    ViewpointTuple(double azimuth_deg, double elevation_deg, double inplane_deg);

    double azimuth_deg() const { return azimuth_; }
    double elevation_deg() const { return elevation_; }
    double inplane_deg() const { return inplane_; }

    friend bool operator==(const ViewpointTuple&, const ViewpointTuple&) = default;

private:
    double azimuth_ = 0.0;
    double elevation_ = 0.0;
    double inplane_ = 0.0;
};

enum class AngleGroup { azimuth = 0, elevation = 1, inplane = 2 };

inline constexpr std::array<AngleGroup, 3> kAngleGroups{AngleGroup::azimuth, AngleGroup::elevation,
                                                        AngleGroup::inplane};

const char* to_string(AngleGroup group);

/**
 * Even discretization of each angle's canonical range. Bin k of a group covers
 * [start + k*w, start + (k+1)*w) where start is 0, -90 and -180 for azimuth,
 * elevation and in-plane respectively, and w = range / bins. The elevation
 * endpoint +90 falls into the last bin.
 *
 * Heads are concatenated per group (azimuth | elevation | in-plane), so the
 * total logit count is the sum of the three counts.
 */
class BinLayout
{
public:
    BinLayout() = default;
    BinLayout(int azimuth_bins, int elevation_bins, int inplane_bins);

    int azimuth_bins() const { return counts_[0]; }
    int elevation_bins() const { return counts_[1]; }
    int inplane_bins() const { return counts_[2]; }
    int bins(AngleGroup group) const { return counts_[static_cast<std::size_t>(group)]; }
    int total_bins() const { return counts_[0] + counts_[1] + counts_[2]; }
    /// Offset of a group's first logit inside a concatenated head.
    int offset(AngleGroup group) const;
    double bin_width_deg(AngleGroup group) const;

    friend bool operator==(const BinLayout&, const BinLayout&) = default;

private:
    std::array<int, 3> counts_{360, 180, 360};
};

struct ViewBins
{
    int azimuth = 0;
    int elevation = 0;
    int inplane = 0;

    int operator[](AngleGroup group) const;
    friend bool operator==(const ViewBins&, const ViewBins&) = default;
};

/// Range start and width (degrees) of one angle group.
double range_start_deg(AngleGroup group);
double range_width_deg(AngleGroup group);

/// Bin index of a single angle (already canonical for its group).
int discretize_angle(double angle_deg, AngleGroup group, int bins);
ViewBins discretize(const ViewpointTuple& v, const BinLayout& layout);

/// Center of one bin; throws std::out_of_range for a bad index.
double bin_center_angle(int bin, AngleGroup group, int bins);
ViewpointTuple bin_center(const ViewBins& bins, const BinLayout& layout);

/**
 * Distance between two viewpoints in radians: great-circle distance of the
 * (azimuth, elevation) points on the unit sphere plus the wrapped absolute
 * in-plane difference. The spherical term is evaluated with atan2 of the
 * cross and dot products, which equals arccos of the dot product but stays
 * accurate for nearly coincident and nearly antipodal points.
 */
double viewpoint_distance(const ViewpointTuple& a, const ViewpointTuple& b);

/// Proper rotation, validated on construction (R^T R = I and det R = 1 within 1e-9).
class RotationMatrix
{
public:
    RotationMatrix() : m_(Eigen::Matrix3d::Identity()) {}
    explicit RotationMatrix(const Eigen::Matrix3d& m);

    const Eigen::Matrix3d& matrix() const { return m_; }
    RotationMatrix operator*(const RotationMatrix& other) const;
    RotationMatrix transpose() const;

    static RotationMatrix axis_angle(const Eigen::Vector3d& axis, double angle_rad);

private:
    Eigen::Matrix3d m_;
};

/**
 * Object rotation for a viewpoint, world z up. Composition is extrinsic:
 * azimuth about z, then elevation about x, then in-plane roll about y (the
 * viewing axis of the reference camera):
 *
 *     R = Ry(psi) * Rx(phi) * Rz(theta)
 *
 * (0, 0, 0) maps to the identity. The renderer's camera is built from the
 * same matrix, so labels and metrics share one convention.
 */
RotationMatrix rotation_from_viewpoint(const ViewpointTuple& v);

/// Angle of R1^T R2 in [0, pi].
double rotation_geodesic(const RotationMatrix& r1, const RotationMatrix& r2);

} // namespace viewsynth
