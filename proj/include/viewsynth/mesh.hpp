#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace viewsynth {

using Face = std::array<std::uint32_t, 3>;

struct Mesh
{
    std::vector<Eigen::Vector3d> vertices;
    std::vector<Face> faces;
    std::vector<Eigen::Vector3d> normals; ///< per-vertex; empty means flat shading

    bool empty() const { return vertices.empty(); }
};

struct Aabb
{
    Eigen::Vector3d min;
    Eigen::Vector3d max;

    Eigen::Vector3d center() const { return 0.5 * (min + max); }
    Eigen::Vector3d extent() const { return max - min; }
};

/// Axis-aligned box of the vertices. Throws std::invalid_argument for an empty mesh.
Aabb bounding_box(const Mesh& mesh);

/// Cube sharing the box center, with side equal to the largest box extent.
Aabb bounding_cube(const Mesh& mesh);

/// Checks face indices and removes faces with area <= 1e-12.
/// Throws std::invalid_argument for an out-of-range index.
void cleanup_faces(Mesh& mesh);

/// Area-weighted per-vertex normals.
std::vector<Eigen::Vector3d> vertex_normals(const Mesh& mesh);

/// Wavefront OBJ: "v" and "f" records; polygons are fan-triangulated,
/// negative (relative) indices are supported, texture and normal indices are
/// ignored. Throws InputError on malformed input.
Mesh read_obj(std::istream& in);
Mesh read_obj(const std::filesystem::path& path);

/// Writes vertices, recomputed vertex normals and faces. Output is byte-stable
/// for identical meshes.
void write_obj(std::ostream& out, const Mesh& mesh);
void write_obj(const std::filesystem::path& path, const Mesh& mesh);

} // namespace viewsynth
