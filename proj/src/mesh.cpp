#include "viewsynth/mesh.hpp"

#include "viewsynth/errors.hpp"

#include <Eigen/Geometry>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace viewsynth {

Aabb bounding_box(const Mesh& mesh)
{
    if (mesh.vertices.empty()) {
        throw std::invalid_argument("bounding box of an empty mesh");
    }
    Aabb box{mesh.vertices.front(), mesh.vertices.front()};
    for (const auto& v : mesh.vertices) {
        box.min = box.min.cwiseMin(v);
        box.max = box.max.cwiseMax(v);
    }
    return box;
}

Aabb bounding_cube(const Mesh& mesh)
{
    const Aabb box = bounding_box(mesh);
    const double half = 0.5 * box.extent().maxCoeff();
    const Eigen::Vector3d c = box.center();
    return {c.array() - half, c.array() + half};
}

void cleanup_faces(Mesh& mesh)
{
    const auto n = static_cast<std::uint32_t>(mesh.vertices.size());
    std::vector<Face> kept;
    kept.reserve(mesh.faces.size());
    for (const Face& f : mesh.faces) {
        for (const auto idx : f) {
            if (idx >= n) {
                throw std::invalid_argument("face index " + std::to_string(idx) + " out of range");
            }
        }
        const Eigen::Vector3d e1 = mesh.vertices[f[1]] - mesh.vertices[f[0]];
        const Eigen::Vector3d e2 = mesh.vertices[f[2]] - mesh.vertices[f[0]];
        if (0.5 * e1.cross(e2).norm() > 1e-12) {
            kept.push_back(f);
        }
    }
    mesh.faces = std::move(kept);
}

std::vector<Eigen::Vector3d> vertex_normals(const Mesh& mesh)
{
    std::vector<Eigen::Vector3d> normals(mesh.vertices.size(), Eigen::Vector3d::Zero());
    for (const Face& f : mesh.faces) {
        // Cross product length is twice the area, so this is area weighting.
        const Eigen::Vector3d n =
            (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
        for (const auto idx : f) {
            normals[idx] += n;
        }
    }
    for (auto& n : normals) {
        const double len = n.norm();
        if (len > 0.0) {
            n /= len;
        }
    }
    return normals;
}

namespace {

std::string_view next_token(std::string_view& line)
{
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string_view::npos) {
        line = {};
        return {};
    }
    line.remove_prefix(start);
    const auto end = line.find_first_of(" \t\r");
    const auto tok = line.substr(0, end);
    line.remove_prefix(end == std::string_view::npos ? line.size() : end);
    return tok;
}

double parse_double(std::string_view tok, std::size_t line_no)
{
    if (!tok.empty() && tok.front() == '+') {
        tok.remove_prefix(1);
    }
    double value = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw InputError("OBJ line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
    }
    return value;
}

std::uint32_t parse_index(std::string_view tok, std::size_t vertex_count, std::size_t line_no)
{
    // Only the position index matters: "7", "7/1", "7//3", "7/1/3".
    tok = tok.substr(0, tok.find('/'));
    long long idx = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || idx == 0) {
        throw InputError("OBJ line " + std::to_string(line_no) + ": bad face index '" + std::string(tok) + "'");
    }
    const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(vertex_count) + idx;
    if (resolved < 0 || resolved >= static_cast<long long>(vertex_count)) {
        throw InputError("OBJ line " + std::to_string(line_no) + ": face index " + std::to_string(idx) +
                         " out of range");
    }
    return static_cast<std::uint32_t>(resolved);
}

void append_double(std::string& out, double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

} // namespace

Mesh read_obj(std::istream& in)
{
    Mesh mesh;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        const auto kind = next_token(line);
        if (kind == "v") {
            Eigen::Vector3d p;
            for (int i = 0; i < 3; ++i) {
                const auto tok = next_token(line);
                if (tok.empty()) {
                    throw InputError("OBJ line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
                }
                p[i] = parse_double(tok, line_no);
            }
            mesh.vertices.push_back(p);
        } else if (kind == "f") {
            std::vector<std::uint32_t> poly;
            for (auto tok = next_token(line); !tok.empty(); tok = next_token(line)) {
                poly.push_back(parse_index(tok, mesh.vertices.size(), line_no));
            }
            if (poly.size() < 3) {
                throw InputError("OBJ line " + std::to_string(line_no) + ": face needs at least 3 vertices");
            }
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
            }
        }
    }
    cleanup_faces(mesh);
    return mesh;
}

Mesh read_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open mesh " + path.string());
    }
    try {
        return read_obj(in);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_obj(std::ostream& out, const Mesh& mesh)
{
    const auto normals = vertex_normals(mesh);
    std::string buf;
    for (const auto& v : mesh.vertices) {
        buf += "v";
        for (int i = 0; i < 3; ++i) {
            buf += ' ';
            append_double(buf, v[i]);
        }
        buf += '\n';
    }
    for (const auto& n : normals) {
        buf += "vn";
        for (int i = 0; i < 3; ++i) {
            buf += ' ';
            append_double(buf, n[i]);
        }
        buf += '\n';
    }
    for (const Face& f : mesh.faces) {
        buf += 'f';
        for (const auto idx : f) {
            const auto s = std::to_string(idx + 1);
            buf += ' ' + s + "//" + s;
        }
        buf += '\n';
    }
    out << buf;
}

void write_obj(const std::filesystem::path& path, const Mesh& mesh)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    write_obj(out, mesh);
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

} // namespace viewsynth
