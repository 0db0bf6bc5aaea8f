#include "histmap/raster.hpp"

#include <algorithm>
#include <cstring>

#include <png.h>

#include "histmap/errors.hpp"

namespace histmap {

RasterImage::RasterImage(int width, int height, Rgb fill)
    : width_(width), height_(height), data_(std::size_t(width) * std::size_t(height) * 3) {
    if (width < 0 || height < 0) throw ValidationError("image dimensions must be non-negative");
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

RgbaImage::RgbaImage(int width, int height)
    : width_(width), height_(height), data_(std::size_t(width) * std::size_t(height) * 4, 0) {
    if (width < 0 || height < 0) throw ValidationError("image dimensions must be non-negative");
}

ClassMask::ClassMask(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), data_(std::size_t(width) * std::size_t(height), fill) {
    if (width < 0 || height < 0) throw ValidationError("mask dimensions must be non-negative");
}

std::size_t Bitmap::count() const { return std::size_t(std::count(bits_.begin(), bits_.end(), std::uint8_t{1})); }

namespace {

void write_png_raw(const std::string& path, int width, int height, png_uint_32 format, const std::uint8_t* data) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError("cannot write PNG '" + path + "': " + msg);
    }
}

// Decodes into `format`. `check` sees the source format first and may reject it.
template <class Alloc, class Check>
void read_png_raw(const std::string& path, png_uint_32 format, Alloc alloc, Check check) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError("cannot read PNG '" + path + "': " + msg);
    }
    try {
        check(image.format);
    } catch (...) {
        png_image_free(&image);
        throw;
    }
    image.format = format;
    std::uint8_t* buffer = alloc(static_cast<int>(image.width), static_cast<int>(image.height));
    if (!png_image_finish_read(&image, nullptr, buffer, 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError("cannot decode PNG '" + path + "': " + msg);
    }
}

constexpr Rgb kPalette[] = {
    {0, 0, 0},       // no data
    {204, 51, 51},   // buildings
    {128, 128, 128}, // infrastructure
    {76, 175, 80},   // recreational
    {240, 200, 60},  // sealed
    {30, 120, 220},  // water
};

} // namespace

void write_png(const std::string& path, const RasterImage& image) {
    write_png_raw(path, image.width(), image.height(), PNG_FORMAT_RGB, image.bytes().data());
}

void write_png(const std::string& path, const ClassMask& mask) {
    write_png_raw(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, mask.values().data());
}

void write_png(const std::string& path, const RgbaImage& image) {
    write_png_raw(path, image.width(), image.height(), PNG_FORMAT_RGBA, image.bytes().data());
}

RasterImage read_png_rgb(const std::string& path) {
    RasterImage out;
    read_png_raw(
        path, PNG_FORMAT_RGB,
        [&](int w, int h) {
            out = RasterImage(w, h);
            return out.bytes().data();
        },
        [](png_uint_32) {});
    return out;
}

ClassMask read_png_mask(const std::string& path) {
    ClassMask out;
    read_png_raw(
        path, PNG_FORMAT_GRAY,
        [&](int w, int h) {
            out = ClassMask(w, h);
            return out.values().data();
        },
        [&](png_uint_32 source) {
            if (source & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_LINEAR))
                throw ValidationError("mask '" + path + "' is not an 8-bit single-channel PNG");
        });
    return out;
}

RgbaImage read_png_rgba(const std::string& path) {
    RgbaImage out;
    read_png_raw(
        path, PNG_FORMAT_RGBA,
        [&](int w, int h) {
            out = RgbaImage(w, h);
            return out.bytes().data();
        },
        [](png_uint_32) {});
    return out;
}

Rgb mask_palette_color(std::uint8_t class_value) {
    return class_value < std::size(kPalette) ? kPalette[class_value] : Rgb{255, 0, 255};
}

RasterImage colorize_mask(const ClassMask& mask) {
    RasterImage out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) out.set(x, y, mask_palette_color(mask.at(x, y)));
    return out;
}

} // namespace histmap
