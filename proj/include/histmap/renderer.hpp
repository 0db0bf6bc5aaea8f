#pragma once

#include <memory>
#include <span>
#include <vector>

#include "histmap/font.hpp"
#include "histmap/geo_core.hpp"
#include "histmap/raster.hpp"
#include "histmap/style.hpp"

namespace histmap {

/// Maps map coordinates into the pixel space of a (possibly supersampled)
/// canvas. Pixel (c, r) has its center at (c + 0.5, r + 0.5).
struct PixelTransform {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixels_per_unit = 1.0;

    static PixelTransform of(const TileWindow& window, int supersample = 1) {
        return {window.origin_x, window.origin_y, window.scale * supersample};
    }

    Point apply(Point p) const {
        return {(p.x - origin_x) * pixels_per_unit, (origin_y - p.y) * pixels_per_unit};
    }
};

/// Even-odd coverage by pixel-center sampling. Degenerate rings cover nothing.
Bitmap rasterize_polygon(const Polygon& polygon, const TileWindow& window);

/// Pixels whose center lies within width_px / 2 of the polyline.
Bitmap rasterize_stroke(const std::vector<Point>& vertices, bool closed, double width_px,
                        const TileWindow& window);

struct LabelStats {
    std::size_t placed = 0;
    std::size_t skipped = 0;
};

struct RenderResult {
    RasterImage image;
    Bitmap overlay; ///< pixels touched by grid lines or label glyphs
    LabelStats labels;
};

/// Renders features under `style` for one window. Features are painted by
/// ascending z_order (stable in input order): polygons filled then outlined,
/// polylines stroked. Grid above surfaces, labels last. With anti_alias on
/// every pixel averages a 4x4 grid of samples.
///
/// Throws ConfigError when labels are enabled but the glyph source is missing.
RasterImage render_map_tile(std::span<const FeatureRecord> features, const StyleSpec& style,
                            const TileWindow& window);

RenderResult render_map_tile_detailed(std::span<const FeatureRecord> features, const StyleSpec& style,
                                      const TileWindow& window);

/// Categorical mask aligned with render_map_tile. Per pixel: the class of the
/// highest-z polygon containing the center (later feature wins ties), else the
/// widest stroked polyline covering it (then higher z, then later feature),
/// else the background class. Grid, labels and anti-aliasing never apply.
ClassMask render_mask_tile(std::span<const FeatureRecord> features, const StyleSpec& style,
                           const TileWindow& window);

/// Draws grid lines at multiples of the grid spacing. A line at pixel
/// position p with width w covers pixel centers in (p - w/2, p + w/2].
/// No-op when the style has no grid.
void draw_grid(const StyleSpec& style, const TileWindow& window, RasterImage& image,
               Bitmap* overlay = nullptr);

/// Draws labels of enabled kinds. House numbers sit at the polygon centroid
/// and are skipped when the text box exceeds the polygon's pixel bounding box.
/// Street names repeat along the line every (text width + repeat gap) pixels
/// starting at the first vertex; a placement is skipped when the segment
/// under its middle is shorter than the text. Place names are centered.
LabelStats place_labels(std::span<const FeatureRecord> features, const StyleSpec& style,
                        const TileWindow& window, RasterImage& image, const Font& font,
                        Bitmap* overlay = nullptr);

/// Mean color of the 5x5 neighborhood around (x, y), clamped to the image,
/// rounded half-up per channel. Throws RangeError when (x, y) is outside.
Rgb estimate_class_color(const RasterImage& image, int x, int y);

} // namespace histmap
