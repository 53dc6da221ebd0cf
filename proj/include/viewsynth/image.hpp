#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace viewsynth {

/// Row-major 8-bit image with a fixed channel count.
template <int Channels>
struct Image
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    static constexpr int channels = Channels;

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * Channels, 0) {}

    std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * Channels; }
    const std::uint8_t* at(int x, int y) const
    {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * Channels;
    }

    friend bool operator==(const Image&, const Image&) = default;
};

using RgbaImage = Image<4>;
using RgbImage = Image<3>;

/// Reads PNG or JPEG (by content signature) as RGB; alpha is dropped.
/// Throws InputError when the file cannot be decoded.
RgbImage read_rgb(const std::filesystem::path& path);

/// Writes an 8-bit PNG. Throws std::runtime_error on I/O failure.
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const RgbaImage& image);

/// Sub-image [x0, x1) x [y0, y1), clipped to the image.
RgbImage crop(const RgbImage& image, int x0, int y0, int x1, int y1);

} // namespace viewsynth
