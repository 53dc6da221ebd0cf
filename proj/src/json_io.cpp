#include "viewsynth/json_io.hpp"

#include "viewsynth/errors.hpp"

#include <fstream>
#include <stdexcept>

namespace viewsynth {

void to_json(nlohmann::json& j, const ViewpointTuple& v)
{
    j = {{"azimuth_deg", v.azimuth_deg()}, {"elevation_deg", v.elevation_deg()}, {"inplane_deg", v.inplane_deg()}};
}

void from_json(const nlohmann::json& j, ViewpointTuple& v)
{
    v = ViewpointTuple(j.at("azimuth_deg").get<double>(), j.at("elevation_deg").get<double>(),
                       j.at("inplane_deg").get<double>());
}

void to_json(nlohmann::json& j, const BinLayout& layout)
{
    j = {{"azimuth_bins", layout.azimuth_bins()},
         {"elevation_bins", layout.elevation_bins()},
         {"inplane_bins", layout.inplane_bins()}};
}

void from_json(const nlohmann::json& j, BinLayout& layout)
{
    layout = BinLayout(j.at("azimuth_bins").get<int>(), j.at("elevation_bins").get<int>(),
                       j.at("inplane_bins").get<int>());
}

void to_json(nlohmann::json& j, const ViewBins& bins)
{
    j = {{"azimuth", bins.azimuth}, {"elevation", bins.elevation}, {"inplane", bins.inplane}};
}

void from_json(const nlohmann::json& j, ViewBins& bins)
{
    bins.azimuth = j.at("azimuth").get<int>();
    bins.elevation = j.at("elevation").get<int>();
    bins.inplane = j.at("inplane").get<int>();
}

void to_json(nlohmann::json& j, const Box& box)
{
    j = nlohmann::json::array({box.left, box.top, box.right, box.bottom});
}

void from_json(const nlohmann::json& j, Box& box)
{
    if (!j.is_array() || j.size() != 4) {
        throw nlohmann::json::type_error::create(302, "box must be an array [l, t, r, b]", &j);
    }
    box = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

} // namespace viewsynth
