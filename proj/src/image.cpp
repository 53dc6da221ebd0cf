#include "viewsynth/image.hpp"

#include "viewsynth/errors.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>

namespace viewsynth {

namespace {

struct FileCloser
{
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode)
{
    return FilePtr(std::fopen(path.c_str(), mode));
}

RgbImage read_png(std::FILE* fp, const std::filesystem::path& path)
{
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        throw std::runtime_error("png_create_read_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    RgbImage image;
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> rgba;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError("cannot decode PNG " + path.string());
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    // Normalize everything to 8-bit RGBA.
    if (depth == 16) {
        png_set_strip_16(png);
    }
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    if (!(color & PNG_COLOR_MASK_ALPHA) && !png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
    }
    png_read_update_info(png, info);

    rgba.resize(static_cast<std::size_t>(width) * height * 4);
    rows.resize(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = rgba.data() + static_cast<std::size_t>(y) * width * 4;
    }
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    image = RgbImage(width, height);
    for (std::size_t i = 0, n = static_cast<std::size_t>(width) * height; i < n; ++i) {
        std::copy_n(rgba.data() + 4 * i, 3, image.pixels.data() + 3 * i);
    }
    return image;
}

struct JpegError
{
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo)
{
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

RgbImage read_jpeg(std::FILE* fp, const std::filesystem::path& path)
{
    jpeg_decompress_struct cinfo{};
    JpegError err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    RgbImage image;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw InputError("cannot decode JPEG " + path.string());
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    image = RgbImage(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = image.at(0, static_cast<int>(cinfo.output_scanline));
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return image;
}

template <int Channels>
void write_png_impl(const std::filesystem::path& path, const Image<Channels>& image)
{
    static_assert(Channels == 3 || Channels == 4);
    FilePtr fp = open_file(path, "wb");
    if (!fp) {
        throw std::runtime_error("cannot write " + path.string());
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng initialization failed");
    }
    std::vector<png_bytep> rows(image.height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encoding failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 Channels == 4 ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        rows[y] = const_cast<png_bytep>(image.at(0, y));
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(fp.get()) != 0 || std::ferror(fp.get())) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

} // namespace

RgbImage read_rgb(const std::filesystem::path& path)
{
    FilePtr fp = open_file(path, "rb");
    if (!fp) {
        throw InputError("cannot open image " + path.string());
    }
    std::array<unsigned char, 8> sig{};
    const std::size_t n = std::fread(sig.data(), 1, sig.size(), fp.get());
    std::rewind(fp.get());
    if (n == 8 && png_sig_cmp(sig.data(), 0, 8) == 0) {
        return read_png(fp.get(), path);
    }
    if (n >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) {
        return read_jpeg(fp.get(), path);
    }
    throw InputError("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const RgbImage& image)
{
    write_png_impl(path, image);
}

void write_png(const std::filesystem::path& path, const RgbaImage& image)
{
    write_png_impl(path, image);
}

RgbImage crop(const RgbImage& image, int x0, int y0, int x1, int y1)
{
    x0 = std::clamp(x0, 0, image.width);
    x1 = std::clamp(x1, x0, image.width);
    y0 = std::clamp(y0, 0, image.height);
    y1 = std::clamp(y1, y0, image.height);
    RgbImage out(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y) {
        std::copy_n(image.at(x0, y), static_cast<std::size_t>(x1 - x0) * 3, out.at(0, y - y0));
    }
    return out;
}

} // namespace viewsynth
