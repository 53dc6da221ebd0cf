#include "viewsynth/modelaug.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace viewsynth {

int ControlLattice::mirror_index(int index) const
{
    const int n = resolution;
    const int i = index / (n * n);
    const int rest = index % (n * n);
    return (n - 1 - i) * n * n + rest;
}

ControlLattice build_lattice(const Mesh& mesh, int resolution)
{
    if (resolution < 2) {
        throw std::invalid_argument("lattice resolution must be at least 2");
    }
    if (mesh.empty()) {
        throw std::invalid_argument("cannot build a lattice for an empty mesh");
    }
    const Aabb cube = bounding_cube(mesh);
    const double half = 0.5 * cube.extent().x();
    if (!(half > 0.0)) {
        throw std::invalid_argument("mesh has zero extent");
    }
    const Eigen::Vector3d c = cube.center();
    const int n = resolution;

    // Offsets symmetric about the center so mirrored points negate exactly.
    std::vector<double> offsets(n);
    for (int i = 0; i < n; ++i) {
        offsets[i] = (2.0 * i - (n - 1)) * half / (n - 1);
    }

    ControlLattice lattice;
    lattice.resolution = n;
    lattice.spacing = 2.0 * half / (n - 1);
    lattice.mirror_x = c.x();
    lattice.points.reserve(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                lattice.points.emplace_back(c.x() + offsets[i], c.y() + offsets[j], c.z() + offsets[k]);
            }
        }
    }
    for (int idx = 0; idx < static_cast<int>(lattice.points.size()); ++idx) {
        const int m = lattice.mirror_index(idx);
        if (idx <= m) {
            lattice.symmetry_pairs.emplace_back(idx, m);
        }
    }
    return lattice;
}

DeformationField sample_deformation(const ControlLattice& lattice, double stddev, Rng& rng)
{
    if (!(stddev >= 0.0)) {
        throw std::invalid_argument("deformation stddev must be non-negative");
    }
    DeformationField field;
    field.translations.assign(lattice.points.size(), Eigen::Vector3d::Zero());
    if (stddev == 0.0) {
        return field;
    }
    std::normal_distribution<double> normal(0.0, stddev);
    for (const auto& [a, b] : lattice.symmetry_pairs) {
        Eigen::Vector3d d;
        d.x() = normal(rng);
        d.y() = normal(rng);
        d.z() = normal(rng);
        if (a == b) {
            d.x() = 0.0;
        }
        field.translations[a] = d;
        field.translations[b] = reflect_vector(d);
    }
    return field;
}

bool is_symmetric(const ControlLattice& lattice, const DeformationField& field)
{
    if (field.translations.size() != lattice.points.size()) {
        return false;
    }
    return std::all_of(lattice.symmetry_pairs.begin(), lattice.symmetry_pairs.end(), [&](const auto& pair) {
        return field.translations[pair.first] == reflect_vector(field.translations[pair.second]);
    });
}

Mesh apply_deformation(const Mesh& mesh, const ControlLattice& lattice, const DeformationField& field)
{
    if (field.translations.size() != lattice.points.size()) {
        throw std::invalid_argument("deformation field does not match lattice size");
    }
    const double dmax = lattice.spacing;
    Mesh out;
    out.faces = mesh.faces;
    out.vertices.reserve(mesh.vertices.size());
    for (std::size_t vi = 0; vi < mesh.vertices.size(); ++vi) {
        const Eigen::Vector3d& v = mesh.vertices[vi];
        Eigen::Vector3d delta = Eigen::Vector3d::Zero();
        double wsum = 0.0;
        for (std::size_t i = 0; i < lattice.points.size(); ++i) {
            const double d = (v - lattice.points[i]).norm();
            if (d >= dmax) {
                continue;
            }
            const double t = 1.0 - d / dmax;
            const double w = t * t;
            delta += w * field.translations[i];
            wsum += w;
        }
        if (!(wsum > 0.0)) {
            throw std::invalid_argument("vertex " + std::to_string(vi) +
                                        " has no control point within d_max; lattice does not cover the mesh");
        }
        out.vertices.push_back(v + delta / wsum);
    }
    out.normals = vertex_normals(out);
    return out;
}

double reflection_error(const Mesh& mesh, double mirror_x)
{
    if (mesh.vertices.empty()) {
        return 0.0;
    }
    const Aabb box = bounding_box(mesh);
    const double cell = std::max(box.extent().maxCoeff() / 64.0, 1e-12);
    auto key = [&](const Eigen::Vector3d& p) {
        const auto q = ((p - box.min) / cell).array().floor().cast<long long>();
        return (q.x() * 73856093LL) ^ (q.y() * 19349663LL) ^ (q.z() * 83492791LL);
    };
    std::unordered_multimap<long long, std::size_t> grid;
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        grid.emplace(key(mesh.vertices[i]), i);
    }

    double worst = 0.0;
    for (const auto& v : mesh.vertices) {
        const Eigen::Vector3d r(2.0 * mirror_x - v.x(), v.y(), v.z());
        double best = std::numeric_limits<double>::infinity();
        // Nearby cells first; fall back to a full scan when nothing is close.
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dz = -1; dz <= 1; ++dz) {
                    const auto range = grid.equal_range(key(r + cell * Eigen::Vector3d(dx, dy, dz)));
                    for (auto it = range.first; it != range.second; ++it) {
                        best = std::min(best, (mesh.vertices[it->second] - r).norm());
                    }
                }
            }
        }
        if (!(best < cell)) {
            for (const auto& w : mesh.vertices) {
                best = std::min(best, (w - r).norm());
            }
        }
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace viewsynth
