#include "viewsynth/renderer.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace viewsynth {

void RenderConfig::validate() const
{
    if (width < 1 || height < 1) {
        throw std::invalid_argument("render resolution must be at least 1x1");
    }
    if (!(near_clip > 0.0) || !(far_clip > near_clip)) {
        throw std::invalid_argument("clip distances must satisfy 0 < near < far");
    }
    if (!(sensor_width > 0.0)) {
        throw std::invalid_argument("sensor width must be positive");
    }
}

Mesh normalize_mesh(const Mesh& mesh)
{
    const Aabb cube = bounding_cube(mesh);
    const double diagonal = cube.extent().norm();
    if (!(diagonal > 0.0)) {
        throw std::invalid_argument("cannot normalize a zero-extent mesh");
    }
    const Eigen::Vector3d c = cube.center();
    const double s = 1.0 / diagonal;
    Mesh out = mesh;
    for (auto& v : out.vertices) {
        v = (v - c) * s;
    }
    return out;
}

RigidTransform camera_pose(const CameraParams& params)
{
    params.validate();
    Eigen::Matrix3d base;
    base << 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0,     //
        0.0, -1.0, 0.0;
    RigidTransform t;
    t.rotation = base * rotation_from_viewpoint(params.view).matrix();
    t.translation = Eigen::Vector3d(0.0, 0.0, -params.rho);
    return t;
}

double focal_pixels(const CameraParams& params, const RenderConfig& config)
{
    return params.focal / config.sensor_width * config.width;
}

Eigen::Vector2d project_point(const Eigen::Vector3d& p_cam, const CameraParams& params, const RenderConfig& config)
{
    const double fx = focal_pixels(params, config);
    const double fy = fx * params.aspect;
    const double depth = -p_cam.z();
    if (!(depth > 0.0)) {
        throw std::invalid_argument("project_point: point is not in front of the camera");
    }
    return {0.5 * config.width + fx * p_cam.x() / depth, 0.5 * config.height - fy * p_cam.y() / depth};
}

namespace {

double edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double px, double py)
{
    return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

double shade(const Eigen::Vector3d& normal, const Eigen::Vector3d& point, const LightConfig& lights,
             const RenderConfig& config)
{
    double s = lights.ambient ? config.ambient : 0.0;
    for (const PointLight& light : lights.lights) {
        const Eigen::Vector3d l = (light.position - point).normalized();
        s += config.diffuse_scale * light.energy * std::max(0.0, normal.dot(l));
    }
    return std::clamp(s, 0.0, 1.0);
}

} // namespace

RenderBuffers rasterize_buffers(const Mesh& mesh, const CameraParams& params, const LightConfig& lights,
                                const RenderConfig& config)
{
    config.validate();
    const RigidTransform pose = camera_pose(params);
    const Eigen::Vector3d eye = pose.center();
    const int w = config.width;
    const int h = config.height;
    const bool smooth = mesh.normals.size() == mesh.vertices.size() && !mesh.normals.empty();

    RenderBuffers out;
    out.image = RgbaImage(w, h);
    out.face.assign(static_cast<std::size_t>(w) * h, -1);
    out.depth.assign(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());

    std::vector<Eigen::Vector3d> cam(mesh.vertices.size());
    for (std::size_t i = 0; i < cam.size(); ++i) {
        cam[i] = pose.apply(mesh.vertices[i]);
    }

    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const std::array<double, 3> z{-cam[f[0]].z(), -cam[f[1]].z(), -cam[f[2]].z()};
        const int in_front = (z[0] >= config.near_clip) + (z[1] >= config.near_clip) + (z[2] >= config.near_clip);
        if (in_front == 0) {
            continue;
        }
        if (in_front < 3) {
            throw std::invalid_argument("face " + std::to_string(fi) + " crosses the near clip plane");
        }
        if (std::min({z[0], z[1], z[2]}) > config.far_clip) {
            continue;
        }
        const std::array<Eigen::Vector2d, 3> s{project_point(cam[f[0]], params, config),
                                               project_point(cam[f[1]], params, config),
                                               project_point(cam[f[2]], params, config)};
        const double area = edge(s[0], s[1], s[2].x(), s[2].y());
        if (area == 0.0) {
            continue;
        }
        const double min_u = std::min({s[0].x(), s[1].x(), s[2].x()});
        const double max_u = std::max({s[0].x(), s[1].x(), s[2].x()});
        const double min_v = std::min({s[0].y(), s[1].y(), s[2].y()});
        const double max_v = std::max({s[0].y(), s[1].y(), s[2].y()});
        // Pixel i is sampled at i + 0.5.
        const int x0 = std::max(0, static_cast<int>(std::ceil(min_u - 0.5)));
        const int x1 = std::min(w - 1, static_cast<int>(std::floor(max_u - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(min_v - 0.5)));
        const int y1 = std::min(h - 1, static_cast<int>(std::floor(max_v - 0.5)));

        const Eigen::Vector3d& p0 = mesh.vertices[f[0]];
        const Eigen::Vector3d& p1 = mesh.vertices[f[1]];
        const Eigen::Vector3d& p2 = mesh.vertices[f[2]];
        const Eigen::Vector3d face_normal = (p1 - p0).cross(p2 - p0).normalized();

        for (int py = y0; py <= y1; ++py) {
            for (int px = x0; px <= x1; ++px) {
                const double cx = px + 0.5;
                const double cy = py + 0.5;
                double b0 = edge(s[1], s[2], cx, cy) / area;
                double b1 = edge(s[2], s[0], cx, cy) / area;
                double b2 = edge(s[0], s[1], cx, cy) / area;
                if (b0 < 0.0 || b1 < 0.0 || b2 < 0.0) {
                    continue;
                }
                // Perspective-correct interpolation weights.
                const double q0 = b0 / z[0];
                const double q1 = b1 / z[1];
                const double q2 = b2 / z[2];
                const double inv_z = q0 + q1 + q2;
                const double depth = 1.0 / inv_z;
                const std::size_t idx = static_cast<std::size_t>(py) * w + px;
                if (!(depth < out.depth[idx])) {
                    continue;
                }
                out.depth[idx] = depth;
                out.face[idx] = static_cast<int>(fi);

                const Eigen::Vector3d point = (q0 * p0 + q1 * p1 + q2 * p2) / inv_z;
                Eigen::Vector3d n = face_normal;
                if (smooth) {
                    const Eigen::Vector3d blend =
                        q0 * mesh.normals[f[0]] + q1 * mesh.normals[f[1]] + q2 * mesh.normals[f[2]];
                    if (blend.squaredNorm() > 0.0) {
                        n = blend.normalized();
                    }
                }
                // Two-sided lighting: face the normal toward the viewer.
                if (n.dot(eye - point) < 0.0) {
                    n = -n;
                }
                const double intensity = shade(n, point, lights, config);
                std::uint8_t* rgba = out.image.at(px, py);
                for (int c = 0; c < 3; ++c) {
                    rgba[c] = static_cast<std::uint8_t>(std::lround(255.0 * config.albedo[c] * intensity));
                }
                rgba[3] = 255;
            }
        }
    }
    return out;
}

Render rasterize(const Mesh& mesh, const CameraParams& params, const LightConfig& lights, const RenderConfig& config)
{
    return {rasterize_buffers(mesh, params, lights, config).image, params.view};
}

Box project_full_bbox(const Mesh& mesh, const CameraParams& params, const RenderConfig& config)
{
    config.validate();
    const RigidTransform pose = camera_pose(params);
    double min_u = std::numeric_limits<double>::infinity();
    double max_u = -min_u;
    double min_v = min_u;
    double max_v = -min_u;
    bool any = false;
    for (const auto& v : mesh.vertices) {
        const Eigen::Vector3d p = pose.apply(v);
        if (-p.z() < config.near_clip) {
            continue;
        }
        const Eigen::Vector2d uv = project_point(p, params, config);
        min_u = std::min(min_u, uv.x());
        max_u = std::max(max_u, uv.x());
        min_v = std::min(min_v, uv.y());
        max_v = std::max(max_v, uv.y());
        any = true;
    }
    if (!any) {
        throw std::invalid_argument("no mesh vertex lies in front of the camera");
    }
    const auto clamp_w = [&](double x) { return std::clamp(x, 0.0, static_cast<double>(config.width)); };
    const auto clamp_h = [&](double y) { return std::clamp(y, 0.0, static_cast<double>(config.height)); };
    return {clamp_w(std::floor(min_u)), clamp_h(std::floor(min_v)), clamp_w(std::floor(max_u) + 1.0),
            clamp_h(std::floor(max_v) + 1.0)};
}

} // namespace viewsynth
