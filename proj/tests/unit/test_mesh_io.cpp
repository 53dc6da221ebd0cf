#include "viewsynth/errors.hpp"
#include "viewsynth/image.hpp"
#include "viewsynth/json_io.hpp"
#include "viewsynth/mesh.hpp"

#include "oracles.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace viewsynth;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("viewsynth_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("obj reader handles polygons, negative indices and slashes")
{
    std::istringstream in("# quad\n"
                          "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
                          "vn 0 0 1\n"
                          "f 1/1/1 2/2/1 3/3/1 4/4/1\n"
                          "v +2 -1e0 0.5\n"
                          "f -1 1 2\n");
    const Mesh m = read_obj(in);
    CHECK(m.vertices.size() == 5);
    REQUIRE(m.faces.size() == 3);
    CHECK(m.faces[0] == Face{0, 1, 2});
    CHECK(m.faces[1] == Face{0, 2, 3});
    CHECK(m.faces[2] == Face{4, 0, 1});
    CHECK(m.vertices[4].x() == 2.0);
    CHECK(m.vertices[4].y() == -1.0);
}

TEST_CASE("obj reader reports line numbers")
{
    std::istringstream bad_index("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    try {
        read_obj(bad_index);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    std::istringstream bad_number("v 0 zero 0\n");
    CHECK_THROWS_AS(read_obj(bad_number), InputError);
    std::istringstream short_face("v 0 0 0\nv 1 0 0\nf 1 2\n");
    CHECK_THROWS_AS(read_obj(short_face), InputError);
    CHECK_THROWS_AS(read_obj(fs::path("/nonexistent/mesh.obj")), InputError);
}

TEST_CASE("degenerate faces are removed at load time")
{
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\n");
    const Mesh m = read_obj(in);
    REQUIRE(m.faces.size() == 1);
    CHECK(m.faces[0] == Face{0, 1, 3});
}

TEST_CASE("obj round trip is exact and byte stable")
{
    const Mesh m = oracle::symmetric_blob();
    std::ostringstream a;
    write_obj(a, m);
    std::istringstream in(a.str());
    const Mesh back = read_obj(in);
    REQUIRE(back.vertices.size() == m.vertices.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        CHECK(back.vertices[i] == m.vertices[i]);
    }
    CHECK(back.faces == m.faces);
    std::ostringstream b;
    write_obj(b, back);
    CHECK(a.str() == b.str());
}

TEST_CASE("bounding cube and normals")
{
    const Mesh box = oracle::box_mesh(0, 0, 0, 2, 1, 0.5);
    const Aabb bb = bounding_box(box);
    CHECK(bb.min == Eigen::Vector3d(0, 0, 0));
    CHECK(bb.max == Eigen::Vector3d(2, 1, 0.5));
    const Aabb cube = bounding_cube(box);
    CHECK(cube.extent().isApprox(Eigen::Vector3d(2, 2, 2)));
    CHECK(cube.center().isApprox(Eigen::Vector3d(1, 0.5, 0.25)));
    CHECK_THROWS_AS(bounding_box(Mesh{}), std::invalid_argument);

    const auto normals = vertex_normals(box);
    REQUIRE(normals.size() == 8);
    for (const auto& n : normals) {
        CHECK(n.norm() == doctest::Approx(1.0));
    }
}

TEST_CASE("png round trip and crop")
{
    const fs::path dir = scratch_dir("png");
    RgbImage img(5, 3);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 5; ++x) {
            img.at(x, y)[0] = static_cast<std::uint8_t>(x * 50);
            img.at(x, y)[1] = static_cast<std::uint8_t>(y * 80);
            img.at(x, y)[2] = 7;
        }
    }
    write_png(dir / "a.png", img);
    CHECK(read_rgb(dir / "a.png") == img);

    RgbaImage rgba(2, 2);
    rgba.at(1, 1)[3] = 255;
    rgba.at(1, 1)[0] = 200;
    write_png(dir / "b.png", rgba);
    const RgbImage flat = read_rgb(dir / "b.png");
    CHECK(flat.at(1, 1)[0] == 200);

    const RgbImage c = crop(img, 1, 1, 9, 9);
    CHECK(c.width == 4);
    CHECK(c.height == 2);
    CHECK(c.at(0, 0)[0] == img.at(1, 1)[0]);

    std::ofstream(dir / "junk.png") << "not an image";
    CHECK_THROWS_AS(read_rgb(dir / "junk.png"), InputError);
    CHECK_THROWS_AS(read_rgb(dir / "missing.png"), InputError);
}

TEST_CASE("json helpers round trip")
{
    const ViewpointTuple v(12.5, -3.0, 170.0);
    CHECK(nlohmann::json(v).get<ViewpointTuple>() == v);
    const BinLayout l(8, 4, 6);
    CHECK(nlohmann::json(l).get<BinLayout>() == l);
    const ViewBins b{1, 2, 3};
    CHECK(nlohmann::json(b).get<ViewBins>() == b);
    const Box box{1.5, 2, 30, 40.25};
    CHECK(nlohmann::json(box).get<Box>() == box);
    CHECK_THROWS(nlohmann::json::array({1, 2, 3}).get<Box>());
    CHECK_THROWS(nlohmann::json({{"azimuth_deg", 0}, {"elevation_deg", 95}, {"inplane_deg", 0}}).get<ViewpointTuple>());
}
