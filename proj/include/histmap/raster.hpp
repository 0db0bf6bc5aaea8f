#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace histmap {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved RGB8 image, row-major.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, Rgb fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }

    Rgb at(int x, int y) const {
        const std::size_t i = offset(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        const std::size_t i = offset(x, y);
        data_[i] = c.r;
        data_[i + 1] = c.g;
        data_[i + 2] = c.b;
    }

    std::span<std::uint8_t> bytes() { return data_; }
    std::span<const std::uint8_t> bytes() const { return data_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
               3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Interleaved RGBA8 image, used for dust assets.
class RgbaImage {
public:
    RgbaImage() = default;
    RgbaImage(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    const std::uint8_t* pixel(int x, int y) const {
        return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * 4;
    }
    std::uint8_t* pixel(int x, int y) {
        return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * 4;
    }

    std::span<std::uint8_t> bytes() { return data_; }
    std::span<const std::uint8_t> bytes() const { return data_; }

    friend bool operator==(const RgbaImage&, const RgbaImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Single-channel grid of class indices. Rendered masks only ever hold 1..5;
/// a stitched mosaic uses 0 for pixels no patch covers.
class ClassMask {
public:
    ClassMask() = default;
    ClassMask(int width, int height, std::uint8_t fill = 0);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
    void set(int x, int y, std::uint8_t v) { data_[index(x, y)] = v; }

    std::span<std::uint8_t> values() { return data_; }
    std::span<const std::uint8_t> values() const { return data_; }

    friend bool operator==(const ClassMask&, const ClassMask&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Per-pixel boolean coverage.
class Bitmap {
public:
    Bitmap() = default;
    Bitmap(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    bool test(int x, int y) const { return bits_[std::size_t(y) * width_ + x] != 0; }
    void set(int x, int y) { bits_[std::size_t(y) * width_ + x] = 1; }
    std::size_t count() const;

    friend bool operator==(const Bitmap&, const Bitmap&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

// PNG I/O. Maps are RGB8, masks 8-bit grayscale holding raw class values,
// dust assets RGBA8 (RGB and gray inputs are promoted with opaque alpha).
void write_png(const std::string& path, const RasterImage& image);
void write_png(const std::string& path, const ClassMask& mask);
void write_png(const std::string& path, const RgbaImage& image);

RasterImage read_png_rgb(const std::string& path);
ClassMask read_png_mask(const std::string& path);
RgbaImage read_png_rgba(const std::string& path);

/// Fixed viewing palette for the colorized mask sidecar (index 0 is black).
Rgb mask_palette_color(std::uint8_t class_value);
RasterImage colorize_mask(const ClassMask& mask);

} // namespace histmap
