#pragma once

#include "viewsynth/box.hpp"
#include "viewsynth/image.hpp"
#include "viewsynth/mesh.hpp"
#include "viewsynth/paramsampler.hpp"
#include "viewsynth/viewgeom.hpp"

#include <Eigen/Core>

#include <vector>

namespace viewsynth {

struct RenderConfig
{
    int width = 256;
    int height = 256;
    double ambient = 0.25;       ///< shade added when the light config enables ambient light
    double diffuse_scale = 0.08; ///< multiplies light energy in the Lambert term
    double sensor_width = 32.0;  ///< mm; focal 35 mm on this sensor fixes the field of view
    double near_clip = 0.05;
    double far_clip = 1000.0;
    Eigen::Vector3d albedo{0.8, 0.8, 0.8};

    void validate() const;
};

/// x_cam = rotation * x_world + translation.
struct RigidTransform
{
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
    /// Camera optical center in world coordinates.
    Eigen::Vector3d center() const { return -rotation.transpose() * translation; }
};

/// Isotropic scale and translation so the bounding cube is centered at the
/// origin with diagonal 1. Throws std::invalid_argument for an empty or
/// zero-extent mesh.
Mesh normalize_mesh(const Mesh& mesh);

/**
 * World-to-camera transform. Camera axes: x right, y up, looking down -z.
 * The rotation is B * rotation_from_viewpoint(view), where B takes the
 * reference camera (on the -y axis looking at the origin, z up) to camera
 * axes, and the translation is (0, 0, -rho). The optical center lands at
 * rho * (-cos(phi) sin(theta), -cos(phi) cos(theta), sin(phi)) and the
 * origin at (0, 0, -rho). The composition has no singularity, so elevation
 * +-90 needs no special up vector.
 */
RigidTransform camera_pose(const CameraParams& params);

/// Focal length in pixels along x: focal / sensor_width * image width.
double focal_pixels(const CameraParams& params, const RenderConfig& config);

/// Pinhole projection of a camera-space point to pixel coordinates. Throws
/// std::invalid_argument unless z < 0.
Eigen::Vector2d project_point(const Eigen::Vector3d& p_cam, const CameraParams& params, const RenderConfig& config);

struct RenderBuffers
{
    RgbaImage image;
    std::vector<int> face;     ///< winning face per pixel, -1 for background
    std::vector<double> depth; ///< camera-space depth of the winning face
};

struct Render
{
    RgbaImage image;
    ViewpointTuple label; ///< exactly params.view
};

/**
 * Z-buffered rasterization at pixel centers with binary alpha. Faces entirely
 * behind the near plane are skipped; a face straddling it throws
 * std::invalid_argument. Shading is ambient plus the sum of
 * diffuse_scale * energy * max(0, n.l) over lights, clamped to [0, 1], with
 * per-face normals, or interpolated vertex normals when the mesh has them.
 */
RenderBuffers rasterize_buffers(const Mesh& mesh, const CameraParams& params, const LightConfig& lights,
                                const RenderConfig& config);
Render rasterize(const Mesh& mesh, const CameraParams& params, const LightConfig& lights, const RenderConfig& config);

/**
 * Pixel box covering every projected vertex: [floor(min u), floor(max u) + 1)
 * and likewise vertically, clamped to the image. Throws std::invalid_argument
 * when no vertex is in front of the camera.
 */
Box project_full_bbox(const Mesh& mesh, const CameraParams& params, const RenderConfig& config);

} // namespace viewsynth
