#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "histmap/geo_core.hpp"
#include "histmap/raster.hpp"

namespace histmap {

/// World-file affine, in file order: x pixel size, row rotation, column
/// rotation, y pixel size (negative for north-up), then the map position of
/// the center of the upper-left pixel.
struct Affine {
    std::array<double, 6> c{1.0, 0.0, 0.0, -1.0, 0.5, -0.5};

    static Affine north_up(double origin_x, double origin_y, double scale);

    friend bool operator==(const Affine&, const Affine&) = default;
};

struct MosaicEntry {
    std::string patch_path;
    TileWindow window;
};

struct MosaicLayout {
    std::vector<MosaicEntry> entries;
    int width_px = 0;
    int height_px = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double scale = 1.0;
    Affine affine;

    /// Derives the output extent from the union of windows. Throws
    /// LayoutError when windows disagree on scale or do not sit on the
    /// common pixel grid.
    static MosaicLayout from_windows(std::vector<MosaicEntry> entries);

    /// Layout file (JSON): either
    ///   {"manifest": "<path>", "patch_dir": "<dir>", "patch_suffix": ".png"}
    /// or {"entries": [{"patch": "<path>", "window": {...}}, ...]}.
    /// Relative paths resolve against the layout file's directory.
    static MosaicLayout load(const std::filesystem::path& path);

    /// Pixel offset of a window inside the output.
    std::array<int, 2> offset_of(const TileWindow& window) const;
};

enum class MosaicKind { rgb, mask };

struct PlacedImage {
    const RasterImage* image;
    TileWindow window;
};
struct PlacedMask {
    const ClassMask* mask;
    TileWindow window;
};

/// Overlaps resolve as last write by ascending tile_id.
RasterImage stitch_rgb(const MosaicLayout& layout, std::span<const PlacedImage> patches);

enum class MaskOverlap {
    vote,       ///< per-pixel majority over covering patches, ties to the lowest class
    last_write, ///< same rule as RGB: ascending tile_id, last one wins
};

/// Pixels no patch covers are 0.
ClassMask stitch_mask(const MosaicLayout& layout, std::span<const PlacedMask> patches,
                      MaskOverlap policy = MaskOverlap::vote);

/// Reads the layout's patch files. Throws LayoutError on a missing file or
/// when a patch's size differs from its window.
RasterImage stitch_rgb(const MosaicLayout& layout);
ClassMask stitch_mask(const MosaicLayout& layout, MaskOverlap policy = MaskOverlap::vote);

void write_worldfile(const Affine& affine, const std::filesystem::path& path);
Affine read_worldfile(const std::filesystem::path& path);

/// Shortest round-trip decimal, always with a fractional part ("1.0", "999.5").
std::string format_coefficient(double value);

} // namespace histmap
