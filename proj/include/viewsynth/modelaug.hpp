#pragma once

#include "viewsynth/mesh.hpp"
#include "viewsynth/rng.hpp"

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace viewsynth {

/**
 * Regular n x n x n grid of control points spanning a mesh's bounding cube.
 *
 * Point (i, j, k) has flat index (i * n + j) * n + k, with i along x. The
 * symmetry plane is x = mirror_x (the cube center), so point (i, j, k) is
 * paired with (n - 1 - i, j, k); points on the plane pair with themselves.
 */
struct ControlLattice
{
    int resolution = 0;
    std::vector<Eigen::Vector3d> points;
    std::vector<std::pair<int, int>> symmetry_pairs; ///< (a, b) with a <= b
    double spacing = 0.0;                            ///< d_max: distance between grid neighbors
    double mirror_x = 0.0;

    Eigen::Vector3d reflect_point(const Eigen::Vector3d& p) const { return {2.0 * mirror_x - p.x(), p.y(), p.z()}; }
    int mirror_index(int index) const;
};

/// Reflection of a translation vector across the x symmetry plane.
inline Eigen::Vector3d reflect_vector(const Eigen::Vector3d& d) { return {-d.x(), d.y(), d.z()}; }

/// Per-control-point translations.
struct DeformationField
{
    std::vector<Eigen::Vector3d> translations;
};

/// Throws std::invalid_argument for resolution < 2 or an empty mesh.
ControlLattice build_lattice(const Mesh& mesh, int resolution);

/**
 * Draws i.i.d. N(0, stddev^2) translations for one point of every symmetry
 * pair and gives its partner the mirrored vector. Points on the symmetry
 * plane get a zero x component so they stay on it.
 */
DeformationField sample_deformation(const ControlLattice& lattice, double stddev, Rng& rng);

/// True when every symmetry pair carries mirrored translations (exact comparison).
bool is_symmetric(const ControlLattice& lattice, const DeformationField& field);

/**
 * Moves each vertex by the normalized falloff-weighted blend of the
 * translations of control points within lattice.spacing, falloff
 * w(d) = max(0, 1 - d/d_max)^2. Faces are copied unchanged and normals are
 * recomputed. Throws std::invalid_argument naming the first vertex with no
 * control point in range.
 */
Mesh apply_deformation(const Mesh& mesh, const ControlLattice& lattice, const DeformationField& field);

/**
 * Largest distance between a vertex's mirror image and the nearest vertex of
 * the mesh, across the plane x = mirror_x. Zero for an exactly symmetric
 * vertex set.
 */
double reflection_error(const Mesh& mesh, double mirror_x = 0.0);

} // namespace viewsynth
