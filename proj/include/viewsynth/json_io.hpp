#pragma once

#include "viewsynth/box.hpp"
#include "viewsynth/viewgeom.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace viewsynth {

void to_json(nlohmann::json& j, const ViewpointTuple& v);
void from_json(const nlohmann::json& j, ViewpointTuple& v);
void to_json(nlohmann::json& j, const BinLayout& layout);
void from_json(const nlohmann::json& j, BinLayout& layout);
void to_json(nlohmann::json& j, const ViewBins& bins);
void from_json(const nlohmann::json& j, ViewBins& bins);
/// Boxes are [left, top, right, bottom].
void to_json(nlohmann::json& j, const Box& box);
void from_json(const nlohmann::json& j, Box& box);

/// Parses a whole JSON file; throws InputError naming the file on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes j with 2-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace viewsynth
