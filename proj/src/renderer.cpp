#include "histmap/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

#include "histmap/errors.hpp"

namespace histmap {

namespace {

constexpr int kSupersample = 4;

using PixelRings = std::vector<std::vector<Point>>;

PixelRings to_pixel_rings(const Polygon& polygon, const PixelTransform& t) {
    PixelRings out;
    out.reserve(polygon.rings.size());
    for (const auto& ring : polygon.rings) {
        if (ring.size() < 3) continue;
        std::vector<Point> pr;
        pr.reserve(ring.size());
        for (const auto& p : ring) pr.push_back(t.apply(p));
        out.push_back(std::move(pr));
    }
    return out;
}

std::vector<Point> to_pixels(const std::vector<Point>& pts, const PixelTransform& t) {
    std::vector<Point> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(t.apply(p));
    return out;
}

// First pixel index c in [0, limit] with c + 0.5 >= x.
int first_center_at_or_after(double x, int limit) {
    const double clamped = std::clamp(x, -1.0, double(limit) + 1.0);
    int c = std::clamp(static_cast<int>(std::ceil(clamped - 0.5)), 0, limit);
    while (c > 0 && (c - 1) + 0.5 >= x) --c;
    while (c < limit && c + 0.5 < x) ++c;
    return c;
}

// Even-odd scanline fill by pixel-center sampling. The crossing of edge
// (v[i], v[i-1]) with the row's center line is computed exactly as the
// classic crossing-number point test does, so both agree bit for bit.
template <class Fn>
void scanline_fill(const PixelRings& rings, int width, int height, Fn&& fn) {
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (const auto& r : rings)
        for (const auto& p : r) {
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    if (!(ymin <= ymax)) return;
    const int row0 = std::max(0, static_cast<int>(std::floor(std::max(ymin, -1.0))) - 1);
    const int row1 = std::min(height - 1, static_cast<int>(std::ceil(std::min(ymax, double(height) + 1.0))) + 1);

    std::vector<double> xs;
    for (int row = row0; row <= row1; ++row) {
        const double yc = row + 0.5;
        xs.clear();
        for (const auto& ring : rings) {
            const std::size_t n = ring.size();
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                const Point& a = ring[i];
                const Point& b = ring[j];
                if ((a.y > yc) != (b.y > yc)) xs.push_back((b.x - a.x) * (yc - a.y) / (b.y - a.y) + a.x);
            }
        }
        if (xs.size() < 2) continue;
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int c0 = first_center_at_or_after(xs[k], width);
            const int c1 = first_center_at_or_after(xs[k + 1], width);
            for (int c = c0; c < c1; ++c) fn(c, row);
        }
    }
}

double dist2_to_segment(Point p, Point a, Point b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    const double qx = a.x + t * dx - p.x;
    const double qy = a.y + t * dy - p.y;
    return qx * qx + qy * qy;
}

// Pixels whose center is within half_width of any segment. A pixel may be
// reported more than once.
template <class Fn>
void stroke_segments(const std::vector<Point>& pts, bool closed, double half_width, int width, int height, Fn&& fn) {
    if (pts.size() < 2 || !(half_width > 0.0)) return;
    const double hw2 = half_width * half_width;
    const std::size_t segs = closed ? pts.size() : pts.size() - 1;
    for (std::size_t s = 0; s < segs; ++s) {
        const Point a = pts[s];
        const Point b = pts[(s + 1) % pts.size()];
        const double x0 = std::min(a.x, b.x) - half_width;
        const double x1 = std::max(a.x, b.x) + half_width;
        const double y0 = std::min(a.y, b.y) - half_width;
        const double y1 = std::max(a.y, b.y) + half_width;
        if (x1 < 0.0 || y1 < 0.0 || x0 > width || y0 > height) continue;
        const int c0 = std::max(0, static_cast<int>(std::floor(x0)));
        const int c1 = std::min(width - 1, static_cast<int>(std::ceil(x1)));
        const int r0 = std::max(0, static_cast<int>(std::floor(y0)));
        const int r1 = std::min(height - 1, static_cast<int>(std::ceil(y1)));
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c)
                if (dist2_to_segment({c + 0.5, r + 0.5}, a, b) <= hw2) fn(c, r);
    }
}

void validate_features(std::span<const FeatureRecord> features) {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (!is_valid_class(features[i].class_id))
            throw ValidationError("feature " + std::to_string(i) + " has invalid class " +
                                  std::to_string(features[i].class_id));
}

std::vector<std::size_t> paint_order(std::span<const FeatureRecord> features) {
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return features[a].z_order < features[b].z_order; });
    return order;
}

std::shared_ptr<const Font> cached_font(const std::string& source) {
    static std::mutex mutex;
    static std::map<std::string, std::shared_ptr<const Font>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[source];
    if (!slot) slot = Font::resolve(source);
    return slot;
}

// Drawing surface at `ss` samples per pixel along each axis.
struct Canvas {
    RasterImage image;
    Bitmap overlay;
    PixelTransform transform;
    int ss = 1;

    void paint(int x, int y, Rgb c) { image.set(x, y, c); }
    void mark(int x, int y) { overlay.set(x, y); }
};

void grid_on_canvas(const GridStyle& grid, Canvas& canvas) {
    const auto& t = canvas.transform;
    const int w = canvas.image.width();
    const int h = canvas.image.height();
    const double hw = grid.width_px * canvas.ss / 2.0;
    if (!(hw > 0.0)) return;
    const double pad = (hw + 1.0) / t.pixels_per_unit;

    auto draw_band = [&](double p, int limit, auto&& paint_line) {
        const int lo = std::max(0, static_cast<int>(std::floor(p - hw - 0.5)) - 1);
        const int hi = std::min(limit - 1, static_cast<int>(std::ceil(p + hw)) + 1);
        for (int i = lo; i <= hi; ++i) {
            const double center = i + 0.5;
            if (center > p - hw && center <= p + hw) paint_line(i);
        }
    };

    const double x_lo = t.origin_x - pad;
    const double x_hi = t.origin_x + w / t.pixels_per_unit + pad;
    for (double k = std::floor(x_lo / grid.spacing); k <= std::ceil(x_hi / grid.spacing); k += 1.0) {
        const double p = (k * grid.spacing - t.origin_x) * t.pixels_per_unit;
        draw_band(p, w, [&](int col) {
            for (int r = 0; r < h; ++r) {
                canvas.paint(col, r, grid.color);
                canvas.mark(col, r);
            }
        });
    }
    const double y_lo = t.origin_y - h / t.pixels_per_unit - pad;
    const double y_hi = t.origin_y + pad;
    for (double k = std::floor(y_lo / grid.spacing); k <= std::ceil(y_hi / grid.spacing); k += 1.0) {
        const double p = (t.origin_y - k * grid.spacing) * t.pixels_per_unit;
        draw_band(p, h, [&](int row) {
            for (int c = 0; c < w; ++c) {
                canvas.paint(c, row, grid.color);
                canvas.mark(c, row);
            }
        });
    }
}

// Glyph cell centered on `center`, x-axis along (cos a, sin a) in canvas space.
void draw_glyph(Canvas& canvas, const Font& font, const Font::Glyph& glyph, Point center, double angle,
                double unit, Rgb color) {
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    const double radius = 5.0 * unit; // half diagonal of the 6x8 cell
    const int c0 = std::max(0, static_cast<int>(std::floor(center.x - radius)));
    const int c1 = std::min(canvas.image.width() - 1, static_cast<int>(std::ceil(center.x + radius)));
    const int r0 = std::max(0, static_cast<int>(std::floor(center.y - radius)));
    const int r1 = std::min(canvas.image.height() - 1, static_cast<int>(std::ceil(center.y + radius)));
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double dx = c + 0.5 - center.x;
            const double dy = r + 0.5 - center.y;
            const double u = (dx * ca + dy * sa) / unit + Font::kCellWidth / 2.0;
            const double v = (-dx * sa + dy * ca) / unit + Font::kCellHeight / 2.0;
            const int col = static_cast<int>(std::floor(u));
            const int row = static_cast<int>(std::floor(v));
            if (col < 0 || col >= Font::kGlyphWidth || row < 0 || row >= Font::kGlyphHeight) continue;
            if (font.ink(glyph, col, row)) {
                canvas.paint(c, r, color);
                canvas.mark(c, r);
            }
        }
    }
}

// Horizontal text centered on `center` (canvas coordinates).
void draw_text_centered(Canvas& canvas, const Font& font, const std::vector<char32_t>& text, Point center,
                        const LabelRule& rule) {
    const double unit = rule.font_px * canvas.ss / double(Font::kCellHeight);
    const double adv = Font::advance(rule.font_px) * canvas.ss;
    const double left = center.x - adv * double(text.size()) / 2.0;
    for (std::size_t i = 0; i < text.size(); ++i)
        draw_glyph(canvas, font, font.glyph(text[i]), {left + (double(i) + 0.5) * adv, center.y}, 0.0, unit,
                   rule.color);
}

Point ring_centroid(const std::vector<Point>& ring) {
    double a2 = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double cross = ring[j].x * ring[i].y - ring[i].x * ring[j].y;
        a2 += cross;
        cx += (ring[j].x + ring[i].x) * cross;
        cy += (ring[j].y + ring[i].y) * cross;
    }
    if (std::abs(a2) > 1e-12) return {cx / (3.0 * a2), cy / (3.0 * a2)};
    Point m{};
    for (const auto& p : ring) {
        m.x += p.x / double(n);
        m.y += p.y / double(n);
    }
    return m;
}

struct ArcPoint {
    Point p;
    std::size_t segment;
};

// Point at arc length s along a polyline with cumulative lengths `cum`.
ArcPoint point_at(const std::vector<Point>& pts, const std::vector<double>& cum, double s) {
    std::size_t seg = 0;
    while (seg + 2 < pts.size() && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    const Point& a = pts[seg];
    const Point& b = pts[seg + 1];
    return {{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, seg};
}

LabelStats labels_on_canvas(std::span<const FeatureRecord> features, const StyleSpec& style, const TileWindow& window,
                            Canvas& canvas, const Font& font) {
    LabelStats stats;
    const PixelTransform px = PixelTransform::of(window);
    const double ss = canvas.ss;
    auto to_canvas = [&](Point p) { return Point{p.x * ss, p.y * ss}; };

    for (std::size_t idx : paint_order(features)) {
        const auto& f = features[idx];
        if (f.label_kind == LabelKind::none || f.label.empty()) continue;
        const LabelRule& rule = style.label_rule(f.label_kind);
        if (!rule.enabled) continue;
        const auto text = decode_utf8(f.label);
        const double text_w = Font::text_width(text.size(), rule.font_px);

        if (f.label_kind == LabelKind::house_number || f.label_kind == LabelKind::place_name) {
            Point anchor;
            if (const auto* poly = std::get_if<Polygon>(&f.geometry)) {
                if (poly->rings.empty()) continue;
                const auto outer = to_pixels(poly->rings.front(), px);
                if (f.label_kind == LabelKind::house_number) {
                    double x0 = outer[0].x, x1 = outer[0].x, y0 = outer[0].y, y1 = outer[0].y;
                    for (const auto& p : outer) {
                        x0 = std::min(x0, p.x);
                        x1 = std::max(x1, p.x);
                        y0 = std::min(y0, p.y);
                        y1 = std::max(y1, p.y);
                    }
                    if (text_w > x1 - x0 || rule.font_px > y1 - y0) {
                        ++stats.skipped;
                        continue;
                    }
                }
                anchor = ring_centroid(outer);
            } else if (f.label_kind == LabelKind::place_name) {
                const auto pts = to_pixels(std::get<Polyline>(f.geometry).vertices, px);
                std::vector<double> cum{0.0};
                for (std::size_t i = 1; i < pts.size(); ++i)
                    cum.push_back(cum.back() + std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y));
                anchor = point_at(pts, cum, cum.back() / 2.0).p;
            } else {
                ++stats.skipped; // house number on a line
                continue;
            }
            draw_text_centered(canvas, font, text, to_canvas(anchor), rule);
            ++stats.placed;
            continue;
        }

        // Street names.
        const auto* line = std::get_if<Polyline>(&f.geometry);
        if (!line || line->vertices.size() < 2) {
            ++stats.skipped;
            continue;
        }
        const auto pts = to_pixels(line->vertices, px);
        std::vector<double> cum{0.0};
        for (std::size_t i = 1; i < pts.size(); ++i)
            cum.push_back(cum.back() + std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y));
        const double total = cum.back();
        const double stride = text_w + rule.repeat_gap_px;
        const double adv = Font::advance(rule.font_px);
        const double unit = rule.font_px * ss / double(Font::kCellHeight);
        if (text_w > total + 1e-9) {
            ++stats.skipped;
            continue;
        }
        for (double start = 0.0; start + text_w <= total + 1e-9; start += stride) {
            const auto mid = point_at(pts, cum, start + text_w / 2.0);
            if (cum[mid.segment + 1] - cum[mid.segment] + 1e-9 < text_w) {
                ++stats.skipped;
                continue;
            }
            const Point head = point_at(pts, cum, start).p;
            const Point tail = point_at(pts, cum, start + text_w).p;
            const bool reversed = tail.x < head.x; // keep text reading left to right
            for (std::size_t i = 0; i < text.size(); ++i) {
                const double along = (double(i) + 0.5) * adv;
                const double s = reversed ? start + text_w - along : start + along;
                const auto at = point_at(pts, cum, s);
                const Point& a = pts[at.segment];
                const Point& b = pts[at.segment + 1];
                double angle = std::atan2(b.y - a.y, b.x - a.x);
                if (reversed) angle += std::numbers::pi;
                draw_glyph(canvas, font, font.glyph(text[i]), to_canvas(at.p), angle, unit, rule.color);
            }
            ++stats.placed;
        }
    }
    return stats;
}

Canvas paint_surfaces(std::span<const FeatureRecord> features, const StyleSpec& style, const TileWindow& window,
                      int ss) {
    Canvas canvas{RasterImage(window.width_px * ss, window.height_px * ss,
                              style.class_style(style.background_class).fill),
                  Bitmap(window.width_px * ss, window.height_px * ss), PixelTransform::of(window, ss), ss};
    const int w = canvas.image.width();
    const int h = canvas.image.height();
    for (std::size_t idx : paint_order(features)) {
        const auto& f = features[idx];
        const auto& cs = style.class_style(f.class_id);
        const double half = cs.stroke_width_px * ss / 2.0;
        if (const auto* poly = std::get_if<Polygon>(&f.geometry)) {
            const auto rings = to_pixel_rings(*poly, canvas.transform);
            scanline_fill(rings, w, h, [&](int x, int y) { canvas.paint(x, y, cs.fill); });
            for (const auto& r : rings) stroke_segments(r, true, half, w, h, [&](int x, int y) { canvas.paint(x, y, cs.stroke); });
        } else {
            const auto pts = to_pixels(std::get<Polyline>(f.geometry).vertices, canvas.transform);
            stroke_segments(pts, false, half, w, h, [&](int x, int y) { canvas.paint(x, y, cs.stroke); });
        }
    }
    return canvas;
}

RenderResult downsample(const Canvas& canvas, int width, int height) {
    RenderResult out{RasterImage(width, height), Bitmap(width, height), {}};
    const int ss = canvas.ss;
    const int n = ss * ss;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            int sr = 0, sg = 0, sb = 0;
            bool marked = false;
            for (int j = 0; j < ss; ++j) {
                for (int i = 0; i < ss; ++i) {
                    const Rgb c = canvas.image.at(x * ss + i, y * ss + j);
                    sr += c.r;
                    sg += c.g;
                    sb += c.b;
                    marked = marked || canvas.overlay.test(x * ss + i, y * ss + j);
                }
            }
            out.image.set(x, y,
                          {std::uint8_t((sr * 2 + n) / (2 * n)), std::uint8_t((sg * 2 + n) / (2 * n)),
                           std::uint8_t((sb * 2 + n) / (2 * n))});
            if (marked) out.overlay.set(x, y);
        }
    }
    return out;
}

} // namespace

Bitmap rasterize_polygon(const Polygon& polygon, const TileWindow& window) {
    window.validate();
    Bitmap bits(window.width_px, window.height_px);
    scanline_fill(to_pixel_rings(polygon, PixelTransform::of(window)), window.width_px, window.height_px,
                  [&](int x, int y) { bits.set(x, y); });
    return bits;
}

Bitmap rasterize_stroke(const std::vector<Point>& vertices, bool closed, double width_px, const TileWindow& window) {
    window.validate();
    Bitmap bits(window.width_px, window.height_px);
    stroke_segments(to_pixels(vertices, PixelTransform::of(window)), closed, width_px / 2.0, window.width_px,
                    window.height_px, [&](int x, int y) { bits.set(x, y); });
    return bits;
}

RenderResult render_map_tile_detailed(std::span<const FeatureRecord> features, const StyleSpec& style,
                                      const TileWindow& window) {
    style.validate();
    window.validate();
    validate_features(features);
    std::shared_ptr<const Font> font;
    if (style.any_label_enabled()) font = cached_font(style.font);

    const int ss = style.anti_alias ? kSupersample : 1;
    Canvas canvas = paint_surfaces(features, style, window, ss);
    if (style.grid) grid_on_canvas(*style.grid, canvas);
    LabelStats stats;
    if (font) stats = labels_on_canvas(features, style, window, canvas, *font);

    if (ss == 1) return {std::move(canvas.image), std::move(canvas.overlay), stats};
    RenderResult out = downsample(canvas, window.width_px, window.height_px);
    out.labels = stats;
    return out;
}

RasterImage render_map_tile(std::span<const FeatureRecord> features, const StyleSpec& style, const TileWindow& window) {
    return render_map_tile_detailed(features, style, window).image;
}

ClassMask render_mask_tile(std::span<const FeatureRecord> features, const StyleSpec& style, const TileWindow& window) {
    style.validate();
    window.validate();
    validate_features(features);
    const int w = window.width_px;
    const int h = window.height_px;
    const std::size_t n = std::size_t(w) * std::size_t(h);
    const auto t = PixelTransform::of(window);

    constexpr int kNone = std::numeric_limits<int>::min();
    std::vector<int> poly_z(n, kNone);
    std::vector<std::uint8_t> poly_class(n, 0);
    std::vector<double> line_w(n, -1.0);
    std::vector<int> line_z(n, kNone);
    std::vector<std::uint8_t> line_class(n, 0);

    for (const auto& f : features) {
        const auto cls = static_cast<std::uint8_t>(f.class_id);
        if (const auto* poly = std::get_if<Polygon>(&f.geometry)) {
            scanline_fill(to_pixel_rings(*poly, t), w, h, [&](int x, int y) {
                const std::size_t i = std::size_t(y) * w + x;
                if (f.z_order >= poly_z[i]) {
                    poly_z[i] = f.z_order;
                    poly_class[i] = cls;
                }
            });
        } else {
            const double width = style.class_style(f.class_id).stroke_width_px;
            stroke_segments(to_pixels(std::get<Polyline>(f.geometry).vertices, t), false, width / 2.0, w, h,
                            [&](int x, int y) {
                                const std::size_t i = std::size_t(y) * w + x;
                                if (width > line_w[i] || (width == line_w[i] && f.z_order >= line_z[i])) {
                                    line_w[i] = width;
                                    line_z[i] = f.z_order;
                                    line_class[i] = cls;
                                }
                            });
        }
    }

    ClassMask mask(w, h, static_cast<std::uint8_t>(style.background_class));
    auto values = mask.values();
    for (std::size_t i = 0; i < n; ++i) {
        if (poly_class[i] != 0)
            values[i] = poly_class[i];
        else if (line_class[i] != 0)
            values[i] = line_class[i];
    }
    return mask;
}

void draw_grid(const StyleSpec& style, const TileWindow& window, RasterImage& image, Bitmap* overlay) {
    if (!style.grid) return;
    window.validate();
    Canvas canvas{std::move(image), Bitmap(window.width_px, window.height_px), PixelTransform::of(window), 1};
    grid_on_canvas(*style.grid, canvas);
    image = std::move(canvas.image);
    if (overlay) *overlay = std::move(canvas.overlay);
}

LabelStats place_labels(std::span<const FeatureRecord> features, const StyleSpec& style, const TileWindow& window,
                        RasterImage& image, const Font& font, Bitmap* overlay) {
    window.validate();
    Canvas canvas{std::move(image), Bitmap(window.width_px, window.height_px), PixelTransform::of(window), 1};
    const LabelStats stats = labels_on_canvas(features, style, window, canvas, font);
    image = std::move(canvas.image);
    if (overlay) *overlay = std::move(canvas.overlay);
    return stats;
}

Rgb estimate_class_color(const RasterImage& image, int x, int y) {
    if (x < 0 || y < 0 || x >= image.width() || y >= image.height())
        throw RangeError("probe point (" + std::to_string(x) + ", " + std::to_string(y) + ") outside " +
                         std::to_string(image.width()) + "x" + std::to_string(image.height()) + " image");
    const int x0 = std::max(0, x - 2), x1 = std::min(image.width() - 1, x + 2);
    const int y0 = std::max(0, y - 2), y1 = std::min(image.height() - 1, y + 2);
    long sr = 0, sg = 0, sb = 0;
    for (int j = y0; j <= y1; ++j)
        for (int i = x0; i <= x1; ++i) {
            const Rgb c = image.at(i, j);
            sr += c.r;
            sg += c.g;
            sb += c.b;
        }
    const long n = long(x1 - x0 + 1) * long(y1 - y0 + 1);
    auto mean = [n](long s) { return static_cast<std::uint8_t>((2 * s + n) / (2 * n)); };
    return {mean(sr), mean(sg), mean(sb)};
}

} // namespace histmap
